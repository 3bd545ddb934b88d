"""
Mini-batch SGD on the robust (interval) or the standard objective, datasets
and evaluation of trained networks
"""
import logging

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pandas as pd

from ..errors import (
    ConfigError,
    DatasetError,
    GraphError,
    TrainingDiverged
)
from ..graph import Graph
from ..lra import (
    Atom,
    LinConstraint
)
from ..props import (
    Assignment,
    InputVar,
    LinfBall,
    Property
)
from ..utils import mkdir
from ..verify import verify
from .flat import (
    flat_interval_forward,
    ibp_grad,
    Params,
    point_forward,
    point_grad
)


Logger = logging.getLogger(__name__)

Objectives = ('ibp', 'standard')


@dataclass
class Dataset:
    """
    m examples of dimension n with labels in {0, 1}
    """
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or not self.X.size:
            raise DatasetError(f'Expected a non-empty (m, n) array of examples, got shape {self.X.shape}')
        if self.y.shape != (self.X.shape[0], ):
            raise DatasetError(f'Expected {self.X.shape[0]} labels, got shape {self.y.shape}')
        if not np.all(np.isfinite(self.X)):
            raise DatasetError('The examples contain missing or infinite values')
        if not np.all(np.isin(self.y, (0, 1))):
            raise DatasetError(f'Labels must be 0 or 1, got {sorted(set(self.y.tolist()))}')

    def __len__(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]


def load_dataset(path):
    """
    Reads a CSV file with one row per example and the label in the last
    column. A header row is detected and skipped
    """
    df = pd.read_csv(path, header=None)
    numeric = df.apply(pd.to_numeric, errors='coerce')
    if numeric.iloc[0].isna().any():
        numeric = numeric.iloc[1:]
    if numeric.shape[1] < 2:
        raise DatasetError(f'{path}: expected at least one feature column and a label column')
    if numeric.isna().any().any():
        raise DatasetError(f'{path}: non-numeric or missing values')

    Logger.debug(f'Loaded {len(numeric)} example(s) from {path}')
    return Dataset(numeric.iloc[:, :-1].to_numpy(), numeric.iloc[:, -1].to_numpy())


def save_dataset(data, output):
    mkdir(output)
    df = pd.DataFrame(data.X, columns=[f'x{i}' for i in range(data.dim)])
    df['y'] = data.y.astype(int)
    df.to_csv(output, index=False)


def two_moons(n=500, noise=0.1, seed=0):
    """
    Two interleaving half circles, label 0 on the upper and 1 on the lower
    one, with Gaussian noise

    Parameters
    ----------
    n: int, default=500
    noise: float, default=0.1
    seed: int, default=0
    """
    rng   = np.random.default_rng(seed)
    upper = n // 2
    t     = rng.uniform(0, np.pi, n)
    X     = np.where(
        (np.arange(n) < upper)[:, None],
        np.stack([np.cos(t), np.sin(t)], axis=1),
        np.stack([1 - np.cos(t), 0.5 - np.sin(t)], axis=1)
    )
    X += rng.normal(0, noise, X.shape)
    y  = (np.arange(n) >= upper).astype(float)
    return Dataset(X, y)


#%%
def evaluate_loss(params, data, eps):
    """
    Mean loss_hi over the ε boxes and mean concrete loss of a dataset
    """
    _, hi, _ = flat_interval_forward(params, data.X - eps, data.X + eps, data.y)
    loss, _  = point_forward(params, data.X, data.y)
    return float(hi.mean()), float(loss.mean())


def train_ibp(data, eps, template, lr=0.1, batches=10, epochs=20, seed=0, objective='ibp', log=None):
    """
    Mini-batch SGD. The `ibp` objective minimizes the mean upper bound of the
    loss over the ℓ∞ boxes of radius eps around the examples, `standard`
    the mean concrete loss

    Every epoch shuffles the dataset with the seeded generator and splits it
    into `batches` batches; each batch takes a step of lr times the batch
    mean gradient

    Parameters
    ----------
    data: Dataset
    eps: float
    template: Graph or Params
        A graph is initialized from the seed, Params are copied
    lr: float, default=0.1
    batches: int, default=10
    epochs: int, default=20
    seed: int, default=0
    objective: str, default='ibp'
    log: str, default=None
        CSV file receiving epoch, loss_hi and loss per epoch

    Returns
    -------
    params: Params
        With the per-epoch log as a DataFrame in `history`

    Raises
    ------
    TrainingDiverged
        When the loss or the parameters stop being finite
    """
    if lr <= 0 or batches < 1 or epochs < 0 or eps < 0:
        raise ConfigError({'train': f'invalid hyperparameters lr={lr}, batches={batches}, epochs={epochs}, eps={eps}'})
    if objective not in Objectives:
        raise ConfigError({'train.objective': f'unknown objective {objective!r}, expected one of {Objectives}'})

    rng = np.random.default_rng(seed)
    if isinstance(template, Graph):
        params = Params.init(template, rng)
    else:
        params = template.copy()
    if data.dim != len(params.template.inputs):
        raise GraphError(f'The template takes {len(params.template.inputs)} inputs, the examples have {data.dim}')

    rows = []
    for epoch in range(1, epochs + 1):
        for batch in np.array_split(rng.permutation(len(data)), min(batches, len(data))):
            X, y = data.X[batch], data.y[batch]
            if objective == 'ibp':
                grad = ibp_grad(params, X - eps, X + eps, y)
            else:
                grad = point_grad(params, X, y)
            params.theta -= lr * grad

        if not np.all(np.isfinite(params.theta)):
            raise TrainingDiverged(f'Parameters are no longer finite in epoch {epoch}, try a smaller learning rate')
        loss_hi, loss = evaluate_loss(params, data, eps)
        if not (np.isfinite(loss_hi) and np.isfinite(loss)):
            raise TrainingDiverged(f'Loss is no longer finite in epoch {epoch} (loss_hi={loss_hi}, loss={loss})')

        Logger.info(f'Epoch {epoch}/{epochs}: loss_hi={loss_hi:.6f} loss={loss:.6f}')
        rows.append({'epoch': epoch, 'loss_hi': loss_hi, 'loss': loss})

    params.history = pd.DataFrame(rows, columns=['epoch', 'loss_hi', 'loss'])
    if log:
        mkdir(log)
        params.history.to_csv(log, index=False)
        Logger.info(f'Wrote training log to {log}')
    return params


#%%
def label_property(net, x, eps, label):
    """
    Every input of the ℓ∞ ball around x is put on the side of 1/2 its label
    asks for: r > 1/2 for label 1, r < 1/2 for label 0
    """
    center = tuple(Fraction(float(v)) for v in x)
    ball   = LinfBall('x', center, Fraction(eps))
    rel    = '>' if label else '<'
    return Property(
        inputs = (InputVar('x', len(center)), ),
        pre    = tuple(ball.atoms()),
        assign = (Assignment('r', net, 'x'), ),
        post   = Atom(LinConstraint.of({'r[0]': 1}, rel, Fraction(1, 2)))
    )


def robust_fraction(model, data, eps, method='interval'):
    """
    Fraction of the examples whose ε ball is proven to get the right label

    Parameters
    ----------
    model: Params or Graph
    data: Dataset
    eps: float or Fraction
        Converted through its decimal representation
    method: str, default='interval'
        Abstract domain used by the verifier
    """
    net = model.to_graph() if isinstance(model, Params) else model
    eps = eps if isinstance(eps, Fraction) else Fraction(str(eps))

    proven = sum(verify(label_property(net, x, eps, int(y)), method).proven for x, y in zip(data.X, data.y))
    Logger.info(f'{proven}/{len(data)} example(s) proven robust at eps={eps} by {method}')
    return proven / len(data)
