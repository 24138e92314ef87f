"""Acceptance charts shared by the test modules."""
from platehom import build_chart

CYLINDER = {"s_lo": -0.5, "s_hi": 0.5,
            "pieces": [{"t_lo": 0.0, "t_hi": 1.0, "kappa": [0.0], "kappa_n": [1.0],
                        "kind": "cylindrical", "direction": {"p": 1, "q": 0}}]}

CONE = {"s_lo": -0.25, "s_hi": 0.25,
        "pieces": [{"t_lo": 0.0, "t_hi": 1.0, "kappa": [1.0], "kappa_n": [1.0], "kind": "conical"}]}

MIXED = {"s_lo": -0.25, "s_hi": 0.25,
         "pieces": [{"t_lo": 0.0, "t_hi": 0.5, "kappa": [0.0], "kappa_n": [1.0],
                     "kind": "cylindrical", "direction": {"p": 1, "q": 0}},
                    {"t_lo": 0.5, "t_hi": 1.0, "kappa": [1.0], "kappa_n": [1.0], "kind": "conical"}]}


def cylinder():
    return build_chart(CYLINDER)


def cone():
    return build_chart(CONE)


def mixed():
    return build_chart(MIXED)


ALL = {"cylinder": cylinder, "cone": cone, "mixed": mixed}
