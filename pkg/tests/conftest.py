import numpy as np
import pytest

from otseg.histograms import Palette
from otseg.image import Image, LabelMap
from otseg.merge import build_rag


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_partition(rng, h, w, n_regions):
    """Connected-ish random label map: nearest of n random sites."""
    sites = np.stack(
        [rng.uniform(0, h, size=n_regions), rng.uniform(0, w, size=n_regions)], axis=1
    )
    ys, xs = np.mgrid[0:h, 0:w]
    d = (ys[..., None] - sites[:, 0]) ** 2 + (xs[..., None] - sites[:, 1]) ** 2
    labels = np.argmin(d, axis=2).astype(np.int32)
    ids, inverse = np.unique(labels, return_inverse=True)
    return LabelMap(inverse.reshape(h, w).astype(np.int32))


def random_graph(rng, h=16, w=16, n_regions=8, k=4):
    """Random RegionGraph over a random Voronoi partition and palette."""
    from otseg.histograms import region_histograms

    lm = random_partition(rng, h, w, n_regions)
    img = Image(rng.random((h, w, 1)), "gray")
    centers = np.sort(rng.choice(np.linspace(0, 1, 64), size=k, replace=False))
    pal = Palette(centers[:, None])
    stats = region_histograms(img, lm, pal)
    return img, lm, pal, build_rag(lm, stats, pal)
