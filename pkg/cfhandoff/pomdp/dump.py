"""Writes a model in a plain-text interchange format for external solvers.

The file follows the layout of the classic ``.pomdp`` format with one block
per stage::

    discount: 0.95
    horizon: 10
    values: reward
    pool: 3 17 42
    states: s000 s001 ...
    actions: a0 a1 ...
    observations: o000 o001 ...
    start: 0.25 0.25 ...
    stage: 1
    T: * : s010 : s011 0.123456789
    O: a0 : s010 : o010 1
    R: a0 : s010 : * : * 6.54321
    stage: 2
    ...

State and observation names spell the labels of the pool APs (1 good,
0 bad) in pool order. ``T`` lines of stage k give the transition into stage
k and are identical for every action; only non-zero entries are written.
Rewards do not depend on the stage and are written in the first block only.
"""
from cfhandoff.errors import ExportError
from cfhandoff.pomdp.belief import expand_belief
from cfhandoff.utils import format_float, get_logger


logger = get_logger(__name__)


def _names(prefix, labels):
    return [prefix + ''.join(str(int(x)) for x in row) for row in labels]


def model_lines(model):
    """Yields the lines of the interchange file of ``model``."""
    states = _names('s', model.states)
    observations = _names('o', model.states)
    actions = [f'a{a}' for a in range(model.n_actions)]

    yield f'discount: {format_float(model.discount)}'
    yield f'horizon: {model.horizon}'
    yield 'values: reward'
    yield 'pool: ' + ' '.join(str(b) for b in model.pool)
    yield 'states: ' + ' '.join(states)
    yield 'actions: ' + ' '.join(actions)
    for a in range(model.n_actions):
        yield f'# a{a} connects APs ' + ' '.join(str(b) for b in model.action_aps(a))
    yield 'observations: ' + ' '.join(observations)
    yield 'start: ' + ' '.join(format_float(p) for p in expand_belief(model.initial_belief))

    for stage in range(1, model.horizon + 1):
        yield f'stage: {stage}'
        matrix = model.transition_matrix(stage)
        for s, row in enumerate(matrix):
            for s_next, p in enumerate(row):
                if p > 0:
                    yield f'T: * : {states[s]} : {states[s_next]} {format_float(p)}'
        tensor = model.observation_tensor(stage, literal=True)
        for a in range(model.n_actions):
            for s in range(model.n_states):
                for o in range(model.n_observations):
                    if tensor[a, s, o] > 0:
                        yield f'O: {actions[a]} : {states[s]} : {observations[o]} ' \
                              f'{format_float(tensor[a, s, o])}'
        if stage == 1:
            for a in range(model.n_actions):
                for s in range(model.n_states):
                    yield f'R: {actions[a]} : {states[s]} : * : * ' \
                          f'{format_float(model.reward_table[s, a])}'


def dump_model(model, path):
    """Writes ``model`` to ``path``.

    Arguments:
    ----------
        model (cfhandoff.pomdp.model.PomdpModel):
            Model to export.
        path (pathlib.Path):
            Destination file.
    """
    try:
        with open(path, 'w') as dump_file:
            for line in model_lines(model):
                dump_file.write(line + '\n')
    except OSError as error:
        raise ExportError(path, error.strerror or str(error))
    logger.info(f'Model of pool {model.pool} written to {path}.')
