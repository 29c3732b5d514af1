import sys
from pathlib import Path

# The package is imported as `src.*` from the repository root, like main.py does.
sys.path.insert(0, str(Path(__file__).resolve().parent))
