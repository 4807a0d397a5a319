"""Allow ``python -m ordpoly`` as an alternative to the console script."""
from .cli import main

main()
