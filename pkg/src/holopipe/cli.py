"""Command-line entry point.

    holopipe settings.txt [more.txt ...]   run batches from settings files
    holopipe --rpc                         serve the JSON command protocol

The exit status is the ErrorCode of the (first failing) run.
"""

import argparse
import sys

from .errors import ErrorCode
from .settings import run_batch_from_config_file


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="holopipe",
        description="Off-axis digital holography batch processor")
    parser.add_argument("settings", nargs="*",
                        help="tab-delimited settings file(s) to run")
    parser.add_argument("--rpc", action="store_true",
                        help="serve the line-delimited JSON protocol on stdio")
    args = parser.parse_args(argv)

    if args.rpc:
        from .rpc import serve
        serve()
        return 0

    if not args.settings:
        parser.print_usage()
        return int(ErrorCode.ERROR)

    for path in args.settings:
        code = run_batch_from_config_file(path)
        if code != ErrorCode.SUCCESS:
            print(f"run failed for '{path}' with error code {int(code)} "
                  f"({ErrorCode(code).name})", file=sys.stderr)
            return int(code)
    return int(ErrorCode.SUCCESS)


if __name__ == "__main__":
    sys.exit(main())
