import sys

from tangent_llg import cli


def main():
    return cli.main()


if __name__ == "__main__":
    sys.exit(main())
