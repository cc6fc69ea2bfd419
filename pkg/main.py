"""Application entry point."""

import sys

from cli.commands import main as run_cli


def main() -> None:
	sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
	main()
