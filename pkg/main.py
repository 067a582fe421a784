"""
Boîte à outils des clôtures normales libres et normalisateurs injectifs
Point d'entrée principal
"""

import sys

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
