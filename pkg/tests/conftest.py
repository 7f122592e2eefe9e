import numpy as np
import pytest

from stacksure import learners


@pytest.fixture(scope="session", autouse=True)
def compiled_kernels():
    learners.warm_up()


def brute_force_auc(scores, labels) -> float:
    """Pairwise oracle: wins count 1, ties 0.5, over all pos-neg pairs."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return (wins + 0.5 * ties) / (len(pos) * len(neg))
