"""Write the 20 Newsgroups corpus as `label<TAB>text` lines.

Needs scikit-learn and network access on first use. Headers, footers and quoted
replies are stripped by default; pass --keep-metadata to keep them.
"""

import argparse
import re

from sklearn.datasets import fetch_20newsgroups


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("out")
    parser.add_argument("--subset", default="all", choices=["train", "test", "all"])
    parser.add_argument("--keep-metadata", action="store_true")
    parser.add_argument("--data-home", default=None)
    args = parser.parse_args()

    remove = () if args.keep_metadata else ("headers", "footers", "quotes")
    data = fetch_20newsgroups(subset=args.subset, remove=remove, data_home=args.data_home)
    written = 0
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("label\ttext\n")
        for text, target in zip(data.data, data.target):
            text = re.sub(r"\s+", " ", text).strip()
            if not text:
                continue
            f.write(f"{data.target_names[target]}\t{text}\n")
            written += 1
    print(f"{written} documents written to {args.out}")


if __name__ == "__main__":
    main()
