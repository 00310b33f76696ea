#!/usr/bin/env python3
"""
CLI interface for the holomorphic phase-portrait analyzer
"""

import json
import sys
from pathlib import Path
from typing import Optional

import click
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text
from rich.theme import Theme
from tabulate import tabulate

from .core import PortraitAnalyzer, setup_logging
from utils.catalog import Family
from utils.config import load_config
from utils.error_handler import ExprSyntaxError, HoloError, error_handler
from utils.render_svg import RenderSpec

custom_theme = Theme({
    "info": "bright_cyan",
    "warning": "bright_yellow",
    "danger": "bright_red",
    "success": "bright_green",
    "primary": "bright_magenta",
    "secondary": "cyan",
    "muted": "dim white",
    "title": "bold bright_magenta",
    "header": "bold bright_cyan",
    "panel": "bright_white on rgb(20,20,30)",
    "border": "bright_blue"
})

console = Console(theme=custom_theme)
err_console = Console(theme=custom_theme, stderr=True)

KIND_STYLES = {
    'Center': 'success',
    'FocusRepelling': 'danger',
    'NodeRepelling': 'danger',
    'FocusAttracting': 'info',
    'NodeAttracting': 'info',
    'Saddle': 'warning',
}


def _fail(error: Exception, context: str):
    """Report an error on stderr and exit with its exit code"""
    info = error_handler.handle_error(error, context)
    body = f"[danger]{info['user_friendly_message']}[/danger]\n[muted]{error}[/muted]"
    if isinstance(error, ExprSyntaxError) and error.text:
        body += f"\n\n{error.caret()}"
    if info['recovery_suggestions']:
        body += "\n\n" + "\n".join(f"[info]• {s}[/info]" for s in info['recovery_suggestions'])
    err_console.print(Panel(body, title=info['error_type'], border_style="danger"))
    sys.exit(info['exit_code'])


def _parse_point(ctx, param, value) -> Optional[complex]:
    if value is None:
        return None
    try:
        x, y = (float(part) for part in value.split(','))
    except ValueError:
        raise click.BadParameter("expected X,Y, e.g. 1,0")
    return complex(x, y)


@click.group()
@click.option('--json/--no-json', 'as_json', default=None, help='Machine-readable output')
@click.option('--seed', type=int, default=None, help='Seed for sampled orbits')
@click.option('--rtol', type=float, default=None, help='Relative integration tolerance')
@click.option('--atol', type=float, default=None, help='Absolute integration tolerance')
@click.option('--tcap', type=float, default=None, help='Time cap for limit detection')
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
              help='YAML configuration file')
@click.option('--verbose', '-v', is_flag=True, help='Debug logging')
@click.pass_context
def cli(ctx, as_json, seed, rtol, atol, tcap, config_path, verbose):
    """Phase portraits of holomorphic, inverse, conjugate and Moebius vector fields."""
    ctx.ensure_object(dict)
    try:
        config = load_config(config_path, seed=seed, rtol=rtol, atol=atol, t_cap=tcap)
    except HoloError as e:
        _fail(e, 'config')
    if verbose:
        config = config.updated(log_level='DEBUG')
    setup_logging(config.log_level, config.log_dir)
    ctx.obj['json'] = as_json
    ctx.obj['config'] = config
    ctx.obj['analyzer'] = PortraitAnalyzer(config)


def _show_report(report):
    console.print(Panel(Text(report['field'], style="title"), title=report['kind'],
                        style="panel", border_style="border"))

    table = Table(title="Finite points", title_style="title", border_style="border",
                  header_style="header")
    for column in ("Id", "Location", "Order", "Kind", "Eigenvalue"):
        table.add_column(column)
    for e in report['equilibria']:
        style = KIND_STYLES.get(e['kind'], 'muted')
        eig = e['eig']
        table.add_row(e['id'], f"{e['z'][0]:.6g}{e['z'][1]:+.6g}i", str(e['order']),
                      f"[{style}]{e['kind']}[/{style}]",
                      '' if eig is None else f"{eig[0]:.6g}{eig[1]:+.6g}i")
    console.print(table)

    if report['infinity']:
        inf = Table(title="Equator", title_style="title", border_style="border",
                    header_style="header")
        for column in ("Id", "Chart", "θ", "Kind"):
            inf.add_column(column)
        for p in report['infinity']:
            style = KIND_STYLES.get(p['kind'], 'muted')
            inf.add_row(p['id'], p['chart'], f"{p['theta']:.4f}", f"[{style}]{p['kind']}[/{style}]")
        console.print(inf)
    elif report['infinity_model']:
        console.print(f"[header]Near infinity:[/header] {report['infinity_model']['model']}")

    result = report['classification']
    if result:
        console.print(f"\n[header]Portrait:[/header] [primary]{result['family']} "
                      f"{result['label']}[/primary] (coarse {result['coarse']}, "
                      f"{result['confidence']})")
        if len(result['candidates']) > 1:
            console.print(f"[muted]Candidates: {', '.join(result['candidates'])}[/muted]")
    for flag in report['flags']:
        console.print(f"[warning]⚠ {flag}[/warning]")


@cli.command()
@click.argument('expr')
@click.pass_context
def analyze(ctx, expr):
    """Classify equilibria, infinity and the portrait of EXPR."""
    analyzer = ctx.obj['analyzer']
    try:
        report = analyzer.analyze(expr)
    except HoloError as e:
        _fail(e, 'analyze')
    if ctx.obj['json'] is False:
        _show_report(report)
    else:
        click.echo(json.dumps(report, indent=2))


@cli.command()
@click.argument('expr')
@click.option('--svg', 'svg_path', type=click.Path(dir_okay=False), required=True,
              help='Output SVG file')
@click.option('--levels', type=int, default=0, help='Number of level curves of H to draw')
@click.option('--orbits', type=int, default=12, help='Number of sampled orbits')
@click.option('--size', type=int, default=300, help='Disk radius in pixels')
@click.option('--no-separatrices', is_flag=True, help='Leave separatrices out')
@click.option('--png-grid', 'grid_path', type=click.Path(dir_okay=False), default=None,
              help='Also write a CSV grid of H for external contouring')
@click.pass_context
def portrait(ctx, expr, svg_path, levels, orbits, size, no_separatrices, grid_path):
    """Render the Poincaré-disk portrait of EXPR as SVG."""
    analyzer = ctx.obj['analyzer']
    spec = RenderSpec(disk_radius_px=size, sample_orbit_count=orbits,
                      seed=ctx.obj['config'].seed, include_separatrices=not no_separatrices,
                      levels=levels)
    try:
        analyzer.render(expr, spec, svg_path)
        if grid_path:
            analyzer.potential_grid(expr).write_csv(grid_path)
    except HoloError as e:
        _fail(e, 'render')
    except OSError as e:
        _fail(e, 'render')
    console.print(f"[success]✓ Portrait written to {svg_path}[/success]")


@cli.command(name='integrate')
@click.argument('expr')
@click.option('--from', 'start', required=True, callback=_parse_point, help='Start point X,Y')
@click.option('--t', 't_max', type=float, required=True, help='Elapsed time')
@click.option('--backward', is_flag=True, help='Integrate backward in time')
@click.option('--rtol', type=float, default=None, help='Relative tolerance for this run')
@click.option('--atol', type=float, default=None, help='Absolute tolerance for this run')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), default=None,
              help='CSV file (stdout by default)')
@click.pass_context
def integrate_cmd(ctx, expr, start, t_max, backward, rtol, atol, out_path):
    """Integrate EXPR from a point and print t,x,y,H as CSV."""
    analyzer = ctx.obj['analyzer']
    if rtol is not None or atol is not None:
        analyzer = PortraitAnalyzer(analyzer.config.updated(rtol=rtol, atol=atol))
    try:
        rows = analyzer.integrate(expr, start, t_max, backward)
        if out_path:
            with open(out_path, 'w', newline='') as f:
                analyzer.write_rows(rows, f)
        else:
            analyzer.write_rows(rows, click.get_text_stream('stdout'))
    except HoloError as e:
        _fail(e, 'integrate')
    except OSError as e:
        _fail(e, 'integrate')


@cli.command()
@click.argument('expr')
@click.option('--grid', 'n', type=int, default=101, help='Samples per axis')
@click.option('--extent', type=float, default=None, help='Half-width of the square window')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), default=None,
              help='CSV file (stdout by default)')
@click.pass_context
def potential(ctx, expr, n, extent, out_path):
    """Sample the stream function (or H = Im G) of EXPR on a grid."""
    analyzer = ctx.obj['analyzer']
    try:
        grid = analyzer.potential_grid(expr, n, extent)
        if out_path:
            grid.write_csv(out_path)
            console.print(f"[success]✓ Grid written to {out_path}[/success]")
        else:
            analyzer.write_rows(list(grid.rows()), click.get_text_stream('stdout'),
                                header=('x', 'y', 'H'))
    except (HoloError, ValueError) as e:
        _fail(e, 'potential')


@cli.command(name='catalog')
@click.argument('family', required=False,
                type=click.Choice([f.value for f in Family], case_sensitive=False))
@click.option('--format', 'fmt', type=click.Choice(['table', 'markdown', 'json']),
              default='table', help='Output format')
@click.pass_context
def catalog_cmd(ctx, family, fmt):
    """List the catalog portraits, optionally for one FAMILY."""
    if family:
        family = next(f.value for f in Family if f.value.lower() == family.lower())
    rows = PortraitAnalyzer.catalog_rows(family)
    if ctx.obj['json'] or fmt == 'json':
        click.echo(json.dumps(rows, indent=2))
        return
    columns = ['family', 'label', 'coarse', 'description', 'system']
    if fmt == 'markdown':
        click.echo(tabulate([[r[c] for c in columns] for r in rows], headers=columns,
                            tablefmt="github"))
        return

    table = Table(title="Phase portrait catalog", title_style="title", border_style="border",
                  header_style="header")
    for column in columns:
        table.add_column(column.title(), style="primary" if column == 'label' else None)
    for r in rows:
        table.add_row(*(r[c] for c in columns))
    console.print(table)


@cli.command()
def version():
    """Show version information."""
    version_file = Path(__file__).parent.parent / "VERSION"
    version = version_file.read_text().strip() if version_file.exists() else "0.1.0"

    version_text = Text(f"holomorphic-portraits v{version}", style="title")
    console.print(Panel(version_text, style="panel", border_style="border", padding=(1, 2)))
    console.print(f"  [info]Python:[/info] {sys.version.split()[0]}")
    console.print(f"\n[header]Families:[/header]")
    for family in Family:
        console.print(f"  [success]✓[/success] {family.value}")


if __name__ == "__main__":
    cli()
