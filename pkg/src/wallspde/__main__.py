"""Module entrypoint enabling `python -m wallspde`."""
from __future__ import annotations

from wallspde.main import main

if __name__ == "__main__":
    main()
