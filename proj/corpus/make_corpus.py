#!/usr/bin/env python3
"""Regenerates the corpus problem files. Run from the repo root:
    python3 corpus/make_corpus.py
"""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))

# radius ladder for the Epstein-Hochster domain: geometric, ratio 1/sqrt(2),
# from diam/4 (diam = 2*sqrt(3)) down past the densified-axis spacing
EH_RADII = [0.8660254037844386 * (0.5 ** (k / 2.0)) for k in range(14)]

EH_DOMAIN = {
    "strata": [
        {
            "name": "cube",
            "dim": 3,
            "map": ["x1", "x2", "x3"],
            "lo": [-1.0, -1.0, -1.0],
            "hi": [1.0, 1.0, 1.0],
            "resolution": [9, 9, 9],
        },
        {
            "name": "z-axis",
            "dim": 1,
            "map": ["0", "0", "x1"],
            "lo": [-1.0],
            "hi": [1.0],
            "resolution": [81],
        },
    ]
}

EH_A = [["(pow x1 2)", "(pow x2 2)", "(mul (mul x1 x2) (pow x3 2))"]]


def eh(name, f, solution=None):
    spec = {
        "schema_version": 1,
        "name": name,
        "tags": ["epstein-hochster"],
        "n": 3,
        "m": 0,
        "N": 1,
        "M": 3,
        "A": EH_A,
        "f": [f],
        "domain": EH_DOMAIN,
        "config": {"radii": EH_RADII, "fit_cutoff_factor": 1.5},
    }
    if solution:
        spec["explicit_solution"] = solution
    return spec


def segment(name, n_pts=41, lo=-1.0, hi=1.0):
    return {
        "strata": [
            {
                "name": name,
                "dim": 1,
                "map": ["x1"],
                "lo": [lo],
                "hi": [hi],
                "resolution": [n_pts],
            }
        ]
    }


PROBLEMS = [
    eh("eh_x2y2", "(add (pow x1 2) (pow x2 2))", ["1", "1", "0"]),
    eh("eh_x3y3", "(add (pow x1 3) (pow x2 3))"),
    eh("eh_x2z", "(mul (pow x1 2) x3)"),
    eh("eh_zx2y2", "(mul x3 (add (pow x1 2) (pow x2 2)))"),
    eh("eh_x", "x1"),
    eh("eh_y", "x2"),
    eh("eh_xy", "(mul x1 x2)"),
    eh("eh_xyz", "(mul (mul x1 x2) x3)"),
    eh("eh_xy_plus_x2", "(add (mul x1 x2) (pow x1 2))"),
    eh("eh_x2y2xy", "(add (add (pow x1 2) (pow x2 2)) (mul x1 x2))"),
    {
        "schema_version": 1,
        "name": "identity_poly",
        "tags": [],
        "n": 1,
        "m": 2,
        "N": 1,
        "M": 1,
        "A": [["1"]],
        "f": ["(add (add 1 (mul 2 x1)) (pow x1 2))"],
        "domain": segment("segment"),
        "config": {},
        "explicit_solution": ["(add (add 1 (mul 2 x1)) (pow x1 2))"],
    },
    {
        "schema_version": 1,
        "name": "xf_x2",
        "tags": [],
        "n": 1,
        "m": 1,
        "N": 1,
        "M": 1,
        "A": [["x1"]],
        "f": ["(pow x1 2)"],
        "domain": segment("segment"),
        "config": {},
        "explicit_solution": ["x1"],
    },
    {
        "schema_version": 1,
        "name": "xf_1",
        "tags": [],
        "n": 1,
        "m": 1,
        "N": 1,
        "M": 1,
        "A": [["x1"]],
        "f": ["1"],
        "domain": segment("segment"),
        "config": {},
    },
    {
        "schema_version": 1,
        "name": "gradient_pair",
        "tags": [],
        "n": 2,
        "m": 1,
        "N": 2,
        "M": 1,
        "A": [["x1"], ["x2"]],
        "f": ["(pow x1 2)", "(mul x1 x2)"],
        "domain": {
            "strata": [
                {
                    "name": "square",
                    "dim": 2,
                    "map": ["x1", "x2"],
                    "lo": [-1.0, -1.0],
                    "hi": [1.0, 1.0],
                    "resolution": [15, 15],
                }
            ]
        },
        "config": {},
        "explicit_solution": ["x1"],
    },
]


def main():
    for spec in PROBLEMS:
        path = os.path.join(HERE, spec["name"] + ".json")
        with open(path, "w") as fh:
            json.dump(spec, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
