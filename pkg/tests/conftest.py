import numpy as np

from entkit import ProtocolBuilder, random_unitary


def random_basis_projectors(dim: int, rng) -> list[np.ndarray]:
    u = random_unitary(dim, rng)
    return [np.outer(u[:, i], u[:, i].conj()) for i in range(dim)]


def random_protocol(rng, num_steps: int | None = None):
    """A random valid three-qubit protocol.

    Mixes local unitaries, projective measurements in random bases, and
    transcript-conditioned unitaries. Everything a classical-communication
    round can do, nothing it cannot.
    """
    builder = ProtocolBuilder([[2], [2], [2]])
    n = int(rng.integers(3, 7)) if num_steps is None else num_steps
    for _ in range(n):
        roll = rng.random()
        party = int(rng.integers(0, 3))
        if roll < 0.40:
            builder.unitary(party, random_unitary(2, rng))
        elif roll < 0.75:
            builder.measure(party, random_basis_projectors(2, rng), ["0", "1"])
        else:
            builder.conditioned(party, lambda transcript: random_unitary(2, rng))
    return builder.steps()
