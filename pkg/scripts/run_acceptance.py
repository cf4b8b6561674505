"""Print the acceptance table; exit status is nonzero if any criterion fails."""
import sys

from precess import repro

if __name__ == "__main__":
    outcomes = repro.run_all(set(sys.argv[1:]) or None)
    for o in outcomes:
        print(o.line)
    sys.exit(0 if all(o.passed for o in outcomes) else 1)
