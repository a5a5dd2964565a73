"""Built-in scenes: a big disc at the origin with small discs around it.

All lengths are in units of the big disc radius. The radii, gap and wavenumber are fixture
choices for exercising the symmetry measures.
"""

import math
from collections.abc import Callable

from .scatter2d import Disc, Scene

BIG_RADIUS = 1.0
SMALL_RADIUS = 0.3
GAP = 0.05
WAVENUMBER = 2 * math.pi

# Center distance of the first small disc from the origin.
FIRST_SMALL_DISTANCE = BIG_RADIUS + GAP + SMALL_RADIUS
SMALL_PITCH = 2 * SMALL_RADIUS + GAP


def centered_disc(radius: float = BIG_RADIUS, wavenumber: float = WAVENUMBER) -> Scene:
    return Scene(discs=(Disc(x=0.0, y=0.0, radius=radius),), wavenumber=wavenumber)


def stacked_scene(n_small: int = 1, wavenumber: float = WAVENUMBER) -> Scene:
    """Big disc at the origin with `n_small` small discs stacked on the +y axis."""
    if n_small < 0:
        msg = f"n_small must be nonnegative, got {n_small}."
        raise ValueError(msg)
    discs = [Disc(x=0.0, y=0.0, radius=BIG_RADIUS)]
    discs.extend(
        Disc(x=0.0, y=FIRST_SMALL_DISTANCE + index * SMALL_PITCH, radius=SMALL_RADIUS)
        for index in range(n_small)
    )
    return Scene(discs=tuple(discs), wavenumber=wavenumber)


def c3_scene(wavenumber: float = WAVENUMBER) -> Scene:
    """Big disc with three small discs at 90, 210 and 330 degrees."""
    discs = [Disc(x=0.0, y=0.0, radius=BIG_RADIUS)]
    for degrees in (90.0, 210.0, 330.0):
        angle = math.radians(degrees)
        discs.append(
            Disc(
                x=FIRST_SMALL_DISTANCE * math.cos(angle),
                y=FIRST_SMALL_DISTANCE * math.sin(angle),
                radius=SMALL_RADIUS,
            ),
        )
    return Scene(discs=tuple(discs), wavenumber=wavenumber)


BUILTIN_SCENES: dict[str, Callable[[], Scene]] = {
    "centered_disc": centered_disc,
    "stacked_1": lambda: stacked_scene(1),
    "stacked_3": lambda: stacked_scene(3),
    "c3": c3_scene,
}
