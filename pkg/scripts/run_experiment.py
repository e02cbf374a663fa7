# scripts/run_experiment.py
"""
Experiment entry point for hierstab
Runs one analysis command and writes its JSON or CSV artifact

Examples:
    python scripts/run_experiment.py analyze --fn named:maj3 --rho 0.5
    python scripts/run_experiment.py decay --eps 1 --rho 0.9 --depths 1..6 --format csv
    python scripts/run_experiment.py percolation --n 8..32/8 --rho 0.9 --samples 200000 --out results/perc.csv --format csv
"""

import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.cli import main


if __name__ == "__main__":
    exit(main())
