"""sparselink - equalization and link-level evaluation over sparse wideband channels.

Entry point for running the tool with: python -m sparselink
"""

import sys


def main() -> int:
    """Main entry point for sparselink."""
    from sparselink.app import SparselinkApplication

    app = SparselinkApplication()
    return app.run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
