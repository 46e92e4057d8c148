import numpy as np
import pytest

from tubemorph import Config, Raster


@pytest.fixture(autouse=True)
def serial_config(monkeypatch):
    """Every test starts from a fresh single-worker Config."""
    monkeypatch.setenv("TUBEMORPH_WORKERS", "1")
    monkeypatch.delenv("TUBEMORPH_EXECUTOR", raising=False)
    Config.reset()
    yield
    Config.reset()


def _parse(text: str) -> np.ndarray:
    rows = [line.strip() for line in text.strip().splitlines()]
    return np.array([[ch == "#" for ch in row] for row in rows], dtype=bool)


@pytest.fixture
def ascii_mask():
    """'#' is foreground, anything else background."""

    def build(text: str) -> Raster:
        return Raster.binary(_parse(text))

    return build


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def flood_fill_count():
    """Independent 8-connected component counter."""

    def count(mask: np.ndarray) -> int:
        mask = np.asarray(mask, dtype=bool)
        height, width = mask.shape
        seen = np.zeros_like(mask)
        components = 0
        for r in range(height):
            for c in range(width):
                if not mask[r, c] or seen[r, c]:
                    continue
                components += 1
                stack = [(r, c)]
                seen[r, c] = True
                while stack:
                    y, x = stack.pop()
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            ny, nx = y + dy, x + dx
                            if 0 <= ny < height and 0 <= nx < width:
                                if mask[ny, nx] and not seen[ny, nx]:
                                    seen[ny, nx] = True
                                    stack.append((ny, nx))
        return components

    return count
