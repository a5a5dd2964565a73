import math
from itertools import pairwise

import pytest

from symbreak.scenes import (
    BIG_RADIUS,
    BUILTIN_SCENES,
    FIRST_SMALL_DISTANCE,
    SMALL_PITCH,
    SMALL_RADIUS,
    c3_scene,
    centered_disc,
    stacked_scene,
)


class TestBuiltinScenes:
    def test_centered_disc(self) -> None:
        (disc,) = centered_disc().discs
        assert disc.center == 0
        assert disc.radius == BIG_RADIUS

    @pytest.mark.parametrize("n_small", [0, 1, 3])
    def test_stacked_scene(self, n_small: int) -> None:
        scene = stacked_scene(n_small)
        assert len(scene.discs) == n_small + 1
        heights = [disc.y for disc in scene.discs[1:]]
        assert heights == pytest.approx(
            [FIRST_SMALL_DISTANCE + i * SMALL_PITCH for i in range(n_small)],
        )
        assert all(disc.x == 0 for disc in scene.discs)

    def test_stacked_scene_rejects_negative_count(self) -> None:
        with pytest.raises(ValueError, match="nonnegative"):
            stacked_scene(-1)

    def test_c3_scene_is_threefold(self) -> None:
        scene = c3_scene()
        small = scene.discs[1:]
        assert all(disc.radius == SMALL_RADIUS for disc in small)
        angles = sorted(math.atan2(disc.y, disc.x) % (2 * math.pi) for disc in small)
        gaps = [b - a for a, b in pairwise(angles)]
        assert gaps == pytest.approx([2 * math.pi / 3] * 2)

    def test_registry(self) -> None:
        assert set(BUILTIN_SCENES) == {"centered_disc", "stacked_1", "stacked_3", "c3"}
        assert len(BUILTIN_SCENES["stacked_3"]().discs) == 4
