"""Entry point for `python -m hybrid_linsolve`."""
from .cli import main

if __name__ == "__main__":
    main()
