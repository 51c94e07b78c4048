#!/usr/bin/env python3
"""Generate data/ratings.csv, the bundled sample ratings file.

The file follows the MovieLens ratings.csv layout (userId,movieId,rating,
timestamp). 140 movies, the first hundred carrying the most ratings so they
form the catalogue at L=100. Within the catalogue nine films are clear
favourites (liked probability 0.80..0.92), the bulk sits far below them
(0.04..0.14), and movie 100, the least-rated catalogue entry, is a well-liked
film the ranker has barely seen (0.70): the promotion target used by the
ratings-driven presets.
"""

import random
import sys

OUT = sys.argv[1] if len(sys.argv) > 1 else "data/ratings.csv"


def main() -> None:
    rng = random.Random(424242)
    user = 1
    ts = 900000000
    with open(OUT, "w", encoding="ascii") as f:
        f.write("userId,movieId,rating,timestamp\n")
        for movie in range(1, 141):
            count = 400 - 2 * movie if movie <= 100 else 60 + movie % 17
            if movie == 100:
                liked = 0.70
            elif movie % 11 == 4:
                liked = 0.80 + 0.12 * rng.random()
            else:
                liked = 0.04 + 0.10 * rng.random()
            for _ in range(count):
                if rng.random() < liked:
                    rating = 4.0 + 0.5 * rng.randrange(3)
                else:
                    rating = 0.5 + 0.5 * rng.randrange(7)
                f.write(f"{user},{movie},{rating:.1f},{ts}\n")
                user = 1 + user % 9973
                ts += 1
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
