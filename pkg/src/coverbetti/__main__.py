"""Allow ``python3 -m coverbetti``."""

from .cli import main

main()
