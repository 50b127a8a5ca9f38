"""Additive Runge-Kutta coefficient tables.

The two shipped IMEX pairs are the L-stable, stiffly accurate ARK4(3)6L[2]SA
and ARK5(4)8L[2]SA methods (explicit ERK part plus ESDIRK part sharing the
weights ``b``).  Only the main (high-order) weights
are used since steps are fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as F
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class ArkTableau:
    name: str
    order: int
    a_explicit: np.ndarray
    a_implicit: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def stages(self) -> int:
        return len(self.b)

    @property
    def implicit_diagonal(self) -> np.ndarray:
        return np.diag(self.a_implicit)


@dataclass
class TableauDiagnostics:
    max_residual: float
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.max_residual < 1e-12


def _tableau(name, order, ae, ai, b, c) -> ArkTableau:
    s = len(b)

    def square(rows):
        out = np.zeros((s, s))
        for i, row in enumerate(rows):
            out[i, : len(row)] = [float(x) for x in row]
        return out

    return ArkTableau(name, order, square(ae), square(ai), np.array([float(x) for x in b]), np.array([float(x) for x in c]))


def _ark4():
    g = F(1, 4)
    c = [0, F(1, 2), F(83, 250), F(31, 50), F(17, 20), 1]
    b = [F(82889, 524892), 0, F(15625, 83664), F(69875, 102672), F(-2260, 8211), F(1, 4)]
    ae = [
        [],
        [F(1, 2)],
        [F(13861, 62500), F(6889, 62500)],
        [F(-116923316275, 2393684061468), F(-2731218467317, 15368042101831), F(9408046702089, 11113171139209)],
        [
            F(-451086348788, 2902428689909),
            F(-2682348792572, 7519795681897),
            F(12662868775082, 11960479115383),
            F(3355817975965, 11060851509271),
        ],
        [
            F(647845179188, 3216320057751),
            F(73281519250, 8382639484533),
            F(552539513391, 3454668386233),
            F(3354512671639, 8306763924573),
            F(4040, 17871),
        ],
    ]
    ai = [
        [0],
        [g, g],
        [F(8611, 62500), F(-1743, 31250), g],
        [F(5012029, 34652500), F(-654441, 2922500), F(174375, 388108), g],
        [F(15267082809, 155376265600), F(-71443401, 120774400), F(730878875, 902184768), F(2285395, 8070912), g],
        b,
    ]
    return _tableau("ARK4(3)6L[2]SA", 4, ae, ai, b, c)


def _ark5():
    g = F(41, 200)
    c = [
        0,
        F(41, 100),
        F(2935347310677, 11292855782101),
        F(1426016391358, 7196633302097),
        F(92, 100),
        F(24, 100),
        F(3, 5),
        1,
    ]
    b = [
        F(-872700587467, 9133579230613),
        0,
        0,
        F(22348218063261, 9555858737531),
        F(-1143369518992, 8141816002931),
        F(-39379526789629, 19018526304540),
        F(32727382324388, 42900044865799),
        g,
    ]
    ae = [
        [],
        [F(41, 100)],
        [F(367902744464, 2072280473677), F(677623207551, 8224143866563)],
        [F(1268023523408, 10340822734521), 0, F(1029933939417, 13636558850479)],
        [F(14463281900351, 6315353703477), 0, F(66114435211212, 5879490589093), F(-54053170152839, 4284798021562)],
        [
            F(14090043504691, 34967701212078),
            0,
            F(15191511035443, 11219624916014),
            F(-18461159152457, 12425892160975),
            F(-281667163811, 9011619295870),
        ],
        [
            F(19230459214898, 13134317526959),
            0,
            F(21275331358303, 2942455364971),
            F(-38145345988419, 4862620318723),
            F(-1, 8),
            F(-1, 8),
        ],
        [
            F(-19977161125411, 11928030595625),
            0,
            F(-40795976796054, 6384907823539),
            F(177454434618887, 12078138498510),
            F(782672205425, 8267701900261),
            F(-69563011059811, 9646580694205),
            F(7356628210526, 4942186776405),
        ],
    ]
    ai = [
        [0],
        [g, g],
        [F(41, 400), F(-567603406766, 11931857230679), g],
        [F(683785636431, 9252920307686), 0, F(-110385047103, 1367015193373), g],
        [F(3016520224154, 10081342136671), 0, F(30586259806659, 12414158314087), F(-22760509404356, 11113319521817), g],
        [
            F(218866479029, 1489978393911),
            0,
            F(638256894668, 5436446318841),
            F(-1179710474555, 5321154724896),
            F(-60928119172, 8023461067671),
            g,
        ],
        [
            F(1020004230633, 5715676835656),
            0,
            F(25762820946817, 25263940353407),
            F(-2161375909145, 9755907335909),
            F(-211217309593, 5846859502534),
            F(-4269925059573, 7827059040749),
            g,
        ],
        b,
    ]
    return _tableau("ARK5(4)8L[2]SA", 5, ae, ai, b, c)


def _rk4():
    h = F(1, 2)
    ae = [[], [h], [0, h], [0, 0, 1]]
    # explicit-only pair: both parts share the classical coefficients
    return _tableau("RK4", 4, ae, ae, [F(1, 6), F(1, 3), F(1, 3), F(1, 6)], [0, h, h, 1])


TABLEAUX = {t.name: t for t in (_ark4(), _ark5(), _rk4())}
ALIASES = {"ark4": "ARK4(3)6L[2]SA", "ark5": "ARK5(4)8L[2]SA", "rk4": "RK4"}


def get_tableau(name: str) -> ArkTableau:
    key = ALIASES.get(name.lower(), name)
    try:
        return TABLEAUX[key]
    except KeyError:
        raise KeyError(f"unknown tableau {name!r}; known: {sorted(ALIASES)}") from None


def validate_tableau(tab: ArkTableau) -> TableauDiagnostics:
    """Consistency and order-condition residuals up to order ``min(p, 3)``."""
    ae, ai, b, c = tab.a_explicit, tab.a_implicit, tab.b, tab.c
    res = {
        "row_sum_explicit": np.max(np.abs(ae.sum(axis=1) - c)),
        "row_sum_implicit": np.max(np.abs(ai.sum(axis=1) - c)),
        "sum_b": abs(b.sum() - 1.0),
        "explicit_strictly_lower": np.max(np.abs(np.triu(ae))),
        "implicit_lower": np.max(np.abs(np.triu(ai, 1))),
    }
    p = min(tab.order, 3)
    if p >= 2:
        res["order2_bc"] = abs(b @ c - 0.5)
    if p >= 3:
        res["order3_bc2"] = abs(b @ c**2 - 1.0 / 3.0)
        res["order3_b_ae_c"] = abs(b @ ae @ c - 1.0 / 6.0)
        res["order3_b_ai_c"] = abs(b @ ai @ c - 1.0 / 6.0)
    res = {k: float(v) for k, v in res.items()}
    return TableauDiagnostics(max(res.values()), res)


# plain-text coefficient files ----------------------------------------------------
#
#   name ARK5(4)8L[2]SA
#   stages 8
#   order 5
#   a_explicit
#   <s rows of s numbers>
#   a_implicit
#   <s rows of s numbers>
#   b
#   <s numbers>
#   c
#   <s numbers>
#
# Numbers are floats or exact fractions "p/q"; '#' starts a comment.


def _num(tok: str) -> float:
    return float(F(tok)) if "/" in tok else float(tok)


def load_tableau(path: str | Path) -> ArkTableau:
    lines = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    header = {}
    it = iter(lines)
    sections: dict[str, list[list[float]]] = {}
    current = None
    for line in it:
        key, _, rest = line.partition(" ")
        if key in ("name", "stages", "order"):
            header[key] = rest.strip()
        elif key in ("a_explicit", "a_implicit", "b", "c") and not rest:
            current = key
            sections[current] = []
        else:
            if current is None:
                raise ValueError(f"{path}: numbers before any section: {line!r}")
            sections[current].append([_num(t) for t in line.split()])
    s = int(header["stages"])
    try:
        ae = np.array(sections["a_explicit"], dtype=float).reshape(s, s)
        ai = np.array(sections["a_implicit"], dtype=float).reshape(s, s)
        b = np.array(sum(sections["b"], []), dtype=float).reshape(s)
        c = np.array(sum(sections["c"], []), dtype=float).reshape(s)
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: malformed tableau file ({exc})") from exc
    return ArkTableau(header.get("name", Path(path).stem), int(header["order"]), ae, ai, b, c)


def dump_tableau(tab: ArkTableau, path: str | Path):
    rows = [f"name {tab.name}", f"stages {tab.stages}", f"order {tab.order}"]
    for key, mat in (("a_explicit", tab.a_explicit), ("a_implicit", tab.a_implicit)):
        rows.append(key)
        rows.extend(" ".join(repr(float(x)) for x in r) for r in mat)
    for key, vec in (("b", tab.b), ("c", tab.c)):
        rows.append(key)
        rows.append(" ".join(repr(float(x)) for x in vec))
    Path(path).write_text("\n".join(rows) + "\n")
