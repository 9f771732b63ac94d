"""Why a Pareto transform instead of a weighted sum.

Two candidate sets with two objectives each: the two extremes, one
balanced point and one dominated point. In the first set the balanced
point sits below the line through the extremes, so an even weighting
finds it too. In the second set it sits above that line, on a concave
stretch of the front, and no weighting ever selects it. The Pareto
selector picks the balanced point in both sets.

    python3 demos/concave_front.py
"""
import numpy as np

from socialnav.pareto import rank_candidates, weighted_sum_select


def show(points):
    pts = np.array(points, dtype=float)
    best, fit, knee, _ = rank_candidates(pts, pts.sum(axis=1))
    for p, f, k in zip(points, fit, knee):
        print(f"  {p}  fitness {f:.3f}  distance from utopia {k:.3f}")
    picks = sorted({weighted_sum_select(pts, (w, 1 - w)) for w in np.linspace(0, 1, 101)})
    print(f"  Pareto selector picks {points[best]}")
    print(f"  weighted sums over 101 weightings pick {[points[i] for i in picks]}")


def main():
    print("balanced point below the chord:")
    show([(0.0, 1.0), (1.0, 0.0), (0.4, 0.4), (0.9, 0.9)])
    print("balanced point above the chord (concave front):")
    show([(0.0, 1.0), (1.0, 0.0), (0.6, 0.6), (0.9, 0.9)])


if __name__ == "__main__":
    main()
