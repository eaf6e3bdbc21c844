from .genref import register as register_genref
from .learn_edges import register as register_learn_edges
from .fit import register as register_fit
from .sample import register as register_sample
from .benchmark import register as register_benchmark
from .fidelity import register as register_fidelity

COMMANDS = [
    register_genref,
    register_learn_edges,
    register_fit,
    register_sample,
    register_benchmark,
    register_fidelity,
]

__all__ = ["COMMANDS"]
