"""Entry point for python -m rolegrad."""

from rolegrad.cli.__main__ import main

if __name__ == "__main__":
    main()
