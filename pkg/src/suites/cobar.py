import random
from typing import List, Optional

from ..config import settings
from ..core.cobar import bar_d, check_d_squared, d_sum, dg_functor_residual, random_word
from ..core.quadrature import QuadSpec
from ..logger import logger
from ..scenario import Workspace
from .base import Check, flag

SUITE = "cobar"


def _random_words_residual(count: int, seed: int) -> float:
    """Number of random words whose d² does not vanish."""
    rng = random.Random(seed)
    failures = 0
    for _ in range(count):
        word = random_word(rng, rng.randint(1, 4))
        if not check_d_squared(word):
            failures += 1
            logger.warning("d^2 != 0 on %s: %s", word, d_sum(bar_d(word)), extra={"check": "d_squared[random]"})
    return float(failures)


def build(workspace: Workspace, quad: QuadSpec, seed: Optional[int] = None) -> List[Check]:
    D = workspace.D
    seed = settings.seed if seed is None else seed
    count = workspace.scenario.random_words
    checks: List[Check] = []
    if count:
        checks.append(Check(
            "d_squared[random]", SUITE, "exact",
            lambda: _random_words_residual(count, seed), {"words": count, "seed": seed},
        ))
    for name, word in workspace.words.items():
        params = {"word": name, "letters": str(word)}
        checks.append(Check(f"d_squared[{name}]", SUITE, "exact", lambda word=word: flag(check_d_squared(word)), params))
        checks.append(Check(
            f"dg_functor[{name}]", SUITE, "pl",
            lambda word=word: dg_functor_residual(word, workspace.simplices, D, quad), params,
        ))
    return checks
