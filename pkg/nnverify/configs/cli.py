"""
The command line of nnverify:

```bash
nnverify verify   -p property.json [-p ...] [--method smt] [--jobs 4]
nnverify verify   -m model.json --center 1/2,1/2 --eps 1/10 [--eps-sweep]
nnverify eval     -m model.json --input 11,79 [--all]
nnverify train-ibp --data train.csv --eps 0.05 --out model.json
nnverify config template
nnverify config validate -f config.yml
```

Verdicts and results are printed as JSON on stdout, logs go to stderr. Every
command takes a YAML `--config`; flags given on the command line override
its values.

Exit codes: 0 proven, 1 refuted, 2 unknown, 3 for errors of the inputs and
4 for unexpected failures
"""
import functools
import logging

import click

from .. import logger
from ..errors import (
    ConfigError,
    NNVerifyError
)
from ..graph import (
    argmax_class,
    dump_graph,
    evaluate,
    load_graph,
    run
)
from ..props import parse_property
from ..train import (
    evaluate_loss,
    load_dataset,
    mlp_template,
    robust_fraction,
    train_ibp,
    two_moons
)
from ..utils import (
    dumps,
    save_json,
    to_fraction
)
from ..verify import (
    eps_sweep,
    ExitCodes,
    Proven,
    Refuted,
    Unknown,
    verify_many,
    verify_robustness
)
from . import definitions
from .config import GlobalConfig as Config


Logger = logging.getLogger(__name__)

Errors     = 3
Unexpected = 4


def guarded(func):
    """
    Runs a command body and exits with the code it returns. Package errors
    exit with 3, anything else is logged with its traceback and exits with 4
    """
    @functools.wraps(func)
    def wrap(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            code = func(*args, **kwargs)
        except (click.ClickException, click.exceptions.Exit, click.exceptions.Abort):
            raise
        except NNVerifyError as e:
            click.echo(f'Error: {e}', err=True)
            code = Errors
        except Exception:
            Logger.exception('Unexpected failure')
            code = Unexpected
        ctx.exit(code or 0)

    return wrap


def rationals(string):
    """
    Parses a comma separated list of rationals, eg. "1/2,-3,0.25"
    """
    try:
        return [to_fraction(s) for s in string.split(',') if s.strip()]
    except ValueError as e:
        raise click.BadParameter(str(e))


def setup(config, flags):
    """
    Loads the config file, patches it with the given flags, validates it and
    initializes logging
    """
    Config(config or {}, patch=flags, validate=True)
    logger.init(Config.log.level, Config.log.file or None)
    Logger.debug(f'Configuration: {Config.to_dict()}')
    return Config


def combined_code(verdicts):
    """
    1 when any verdict is refuted, else 2 when any is not proven, else 0
    """
    statuses = {v.status for v in verdicts}
    if Refuted in statuses:
        return ExitCodes[Refuted]
    if statuses - {Proven}:
        return max(ExitCodes[s] for s in statuses)
    return ExitCodes[Proven]


class Group(click.Group):
    """
    Usage errors of the subcommands exit with 3 like the other input errors,
    2 is reserved for unknown verdicts
    """
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = Errors
            raise


#%%
@click.group(cls=Group, invoke_without_command=True, name='nnverify')
@click.pass_context
@click.option('-v', '--version', help='Print the current version', is_flag=True)
@click.option('--path', help='Print the installation path', is_flag=True)
def _cli(ctx, version, path):
    """\
    Verification of neural networks by constraint solving and abstract
    interpretation, and training with interval bound propagation
    """
    import nnverify

    if ctx.invoked_subcommand is None:
        if version:
            click.echo(nnverify.__version__)

        if path:
            click.echo(nnverify.__path__[0])


config_option = click.option('-c', '--config',
    help = 'YAML configuration file, flags override its values',
    type = click.Path(exists=True, dir_okay=False)
)
level_option = click.option('--log-level',
    help = 'Logging level on stderr',
    type = click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False)
)


#%%
@_cli.command(name='verify')
@config_option
@click.option('-p', '--property', 'properties',
    help     = 'Property JSON file, may be repeated',
    type     = click.Path(exists=True, dir_okay=False),
    multiple = True
)
@click.option('-m', '--model',
    help = 'Network JSON file for a local robustness query',
    type = click.Path(exists=True, dir_okay=False)
)
@click.option('--center',
    help = 'Comma separated center of the robustness ball'
)
@click.option('--eps',
    help = 'Radius of the robustness ball, the first radius tried by --eps-sweep'
)
@click.option('--label',
    help = '1-based class the ball must keep, the class of the center by default',
    type = int
)
@click.option('--norm',
    help         = 'Norm of the robustness ball',
    type         = click.Choice(['linf', 'l2']),
    default      = 'linf',
    show_default = True
)
@click.option('--method',
    help = 'smt, reluplex, interval, zonotope or polyhedron',
    type = click.Choice(['smt', 'reluplex', 'interval', 'zonotope', 'polyhedron'])
)
@click.option('--delta',
    help = 'Margin used to decide strict inequalities, eg. 1/1000000'
)
@click.option('--tau',
    help = 'Reluplex repairs of one ReLU before it is split',
    type = int
)
@click.option('--warm-start/--no-warm-start',
    help    = 'Fix the ReLUs interval analysis proves stable before Reluplex',
    default = None
)
@click.option('--fallback/--no-fallback',
    help    = 'Use the SMT path when an abstract method cannot handle a property',
    default = None
)
@click.option('--sigmoid-cuts',
    help = 'Comma separated cut points of the sigmoid bands'
)
@click.option('--eps-sweep/--no-eps-sweep', 'sweep',
    help    = 'Search for the largest radius proven robust',
    default = None
)
@click.option('--sweep-steps',
    help = 'Doublings and bisection steps of the radius search',
    type = int
)
@click.option('-j', '--jobs',
    help = 'Properties verified in parallel',
    type = int
)
@click.option('-o', '--out',
    help = 'Also write the verdicts to this JSON file'
)
@level_option
@guarded
def click_verify(config, properties, model, center, eps, label, norm, method, delta, tau, warm_start, fallback, sigmoid_cuts, sweep, sweep_steps, jobs, out, log_level):
    """\
    Verifies properties, or the local robustness of a model
    """
    cfg = setup(config, {
        'verify.method'     : method,
        'verify.delta'      : delta,
        'verify.tau'        : tau,
        'verify.warm_start' : warm_start,
        'verify.fallback'   : fallback,
        'verify.eps_sweep'  : sweep,
        'verify.sweep_steps': sweep_steps,
        'verify.jobs'       : jobs,
        'encode.sigmoid_cuts': sigmoid_cuts and [str(c) for c in rationals(sigmoid_cuts)],
        'log.level'         : log_level
    })
    options = dict(
        delta      = to_fraction(cfg.verify.delta),
        tau        = cfg.verify.tau,
        warm_start = cfg.verify.warm_start,
        cuts       = tuple(to_fraction(c) for c in cfg.encode.sigmoid_cuts)
    )

    if properties:
        if model:
            raise click.UsageError('--property and --model are exclusive')
        items    = [(path, parse_property(path)) for path in properties]
        verdicts = verify_many(items, cfg.verify.jobs, method=cfg.verify.method, fallback=cfg.verify.fallback, **options)
        for v in verdicts:
            click.echo(dumps(v.to_dict()))
        if out:
            save_json([v.to_dict() for v in verdicts], out)
        return combined_code(verdicts)

    if not (model and center):
        raise click.UsageError('Either --property or --model with --center is required')

    net    = load_graph(model)
    point  = rationals(center)
    method = cfg.verify.method

    if cfg.verify.eps_sweep:
        start = to_fraction(eps) if eps else to_fraction('1/100')
        best, v = eps_sweep(net, point, label, method, start=start, steps=cfg.verify.sweep_steps, norm=norm, **_solver_options(method, options))
        result  = {'eps': str(best), 'method': method, 'verdict': v.to_dict() if v else None}
        click.echo(dumps(result))
        if out:
            save_json(result, out)
        return ExitCodes[Proven] if best > 0 else ExitCodes[Unknown]

    if not eps:
        raise click.UsageError('--eps is required for a robustness query')

    v = verify_robustness(net, point, to_fraction(eps), label, method, norm, **_solver_options(method, options))
    click.echo(dumps(v.to_dict()))
    if out:
        save_json(v.to_dict(), out)
    return v.exit_code


def _solver_options(method, options):
    if method == 'smt':
        return {'delta': options['delta'], 'cuts': options['cuts']}
    if method == 'reluplex':
        return {'delta': options['delta'], 'tau': options['tau'], 'warm_start': options['warm_start']}
    return {}


#%%
@_cli.command(name='eval')
@click.option('-m', '--model',
    help     = 'Network JSON file',
    type     = click.Path(exists=True, dir_okay=False),
    required = True
)
@click.option('-i', '--input', 'values',
    help     = 'Comma separated input values, eg. 11,79',
    required = True
)
@click.option('-a', '--all', 'every',
    help    = 'Print the value of every node',
    is_flag = True
)
@level_option
@guarded
def click_eval(model, values, every, log_level):
    """\
    Evaluates a network on an input
    """
    logger.init(log_level or 'WARNING')
    net = load_graph(model)
    x   = rationals(values)

    if every:
        valuation = run(net, x)
        click.echo(dumps({'valuation': {str(v): valuation[v] for v in net.nodes}}))
    else:
        r = evaluate(net, x)
        click.echo(dumps({'outputs': r, 'class': argmax_class(r).index}))


#%%
@_cli.command(name='train-ibp')
@config_option
@click.option('-d', '--data',
    help = 'Dataset CSV, one example per row and the label last',
    type = click.Path(exists=True, dir_okay=False)
)
@click.option('--moons',
    help = 'Train on this many points of the two moons dataset instead',
    type = int
)
@click.option('--eps',
    help = 'Radius of the training boxes',
    type = float
)
@click.option('--hidden',
    help = 'Comma separated hidden layer widths, eg. 16,16'
)
@click.option('--activation',
    help = 'Activation of the hidden layers',
    type = click.Choice(['relu', 'square'])
)
@click.option('--lr',
    help = 'Learning rate',
    type = float
)
@click.option('--batches',
    help = 'Batches per epoch',
    type = int
)
@click.option('--epochs',
    help = 'Passes over the dataset',
    type = int
)
@click.option('-s', '--seed',
    help = 'Seed of the initialization and the shuffling',
    type = int
)
@click.option('--objective',
    help = 'Minimize the interval loss bound or the standard loss',
    type = click.Choice(['ibp', 'standard'])
)
@click.option('-o', '--out',
    help     = 'Network JSON file to write',
    required = True
)
@click.option('--log',
    help = 'CSV file receiving the per-epoch losses'
)
@click.option('--robust/--no-robust',
    help    = 'Report the fraction of examples proven robust by interval analysis',
    default = False
)
@level_option
@guarded
def click_train(config, data, moons, eps, hidden, activation, lr, batches, epochs, seed, objective, out, log, robust, log_level):
    """\
    Trains a single-output network, robustly by default
    """
    try:
        widths = hidden and [int(h) for h in hidden.split(',') if h.strip()]
    except ValueError:
        raise click.BadParameter(f'not a list of integers: {hidden!r}', param_hint='--hidden')

    cfg = setup(config, {
        'train.eps'       : eps,
        'train.hidden'    : widths,
        'train.activation': activation,
        'train.lr'        : lr,
        'train.batches'   : batches,
        'train.epochs'    : epochs,
        'train.seed'      : seed,
        'train.objective' : objective,
        'log.level'       : log_level
    })
    train = cfg.train

    if data and moons:
        raise click.UsageError('--data and --moons are exclusive')
    if data:
        dataset = load_dataset(data)
    elif moons:
        dataset = two_moons(moons, seed=train.seed)
    else:
        raise click.UsageError('Either --data or --moons is required')

    template = mlp_template(dataset.dim, tuple(train.hidden), train.activation)
    params   = train_ibp(dataset, train.eps, template,
        lr        = train.lr,
        batches   = train.batches,
        epochs    = train.epochs,
        seed      = train.seed,
        objective = train.objective,
        log       = log
    )
    dump_graph(params.to_graph(), out)

    loss_hi, loss = evaluate_loss(params, dataset, train.eps)
    result = {'model': out, 'objective': train.objective, 'epochs': train.epochs, 'loss_hi': loss_hi, 'loss': loss}
    if robust:
        result['robust_fraction'] = robust_fraction(params, dataset, train.eps)
    click.echo(dumps(result))


#%%
@_cli.group(name='config')
def _config():
    """\
    Configuration commands
    """


@_config.command(name='template')
@click.option('-o', '--out',
    help = 'Write the template to this file instead of stdout'
)
@guarded
def click_template(out):
    """\
    Prints a commented YAML template of every configuration key
    """
    string = '\n'.join(definitions.generate()) + '\n'
    if out:
        with open(out, 'w') as file:
            file.write(string)
        click.echo(f'Wrote template to {out}', err=True)
    else:
        click.echo(string, nl=False)


@_config.command(name='validate')
@click.option('-f', '--file',
    help     = 'Configuration file to validate',
    type     = click.Path(exists=True, dir_okay=False),
    required = True
)
@guarded
def click_validate(file):
    """\
    Validates a configuration file against the definitions
    """
    config = Config(file, local=True)
    errors = config.validate(_raise=False)
    if errors:
        raise ConfigError(errors.flatten())
    click.echo(f'No errors were found in {file}')


#%%
class CLI:
    """
    Access to the click commands, eg. to nest them under another CLI
    """
    group    = _cli
    verify   = click_verify
    eval     = click_eval
    train    = click_train
    template = click_template

    @classmethod
    def set_defaults(cls, **kwargs):
        """
        Sets the default values of command options, eg.
        CLI.set_defaults(verify={'norm': 'l2'})
        """
        for cmd, defaults in kwargs.items():
            if hasattr(cls, cmd):
                keys = {param.name: param for param in getattr(cls, cmd).params}
                for key, value in defaults.items():
                    keys[key].default = value
