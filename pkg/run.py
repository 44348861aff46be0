"""Run the fracpoisson command line from a checkout."""

from src.fracpoisson.app import main

if __name__ == '__main__':
    main()
