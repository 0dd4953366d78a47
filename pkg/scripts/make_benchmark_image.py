"""Write the self-similar benchmark image as a PGM for command line runs."""

import argparse

from groupcs import make_motif_image, write_pgm


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.strip())
    ap.add_argument("output", help="destination .pgm path")
    ap.add_argument("--side", type=int, default=64)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args(argv)
    write_pgm(args.output, make_motif_image(args.side, args.seed))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
