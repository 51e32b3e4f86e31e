"""Batch command-line interface.

Exit codes: 0 success, 2 input error (unreadable files, bad masks, bad
flags), 3 computation error (mismatched domains, cross-check failure), 4
environment error (port in use).
"""

from __future__ import annotations

import functools
import sys

import click

from . import imageio, metrics, report
from .domain import TIE_BREAKS, UNSEEN_POLICIES
from .errors import ComputationError, InputError

EXIT_INPUT = 2
EXIT_COMPUTE = 3
EXIT_ENV = 4

_PATH_CHOICES = {
    "definitional": "definitional",
    "histogram-l1": "histogram_l1",
    "max-form": "max_form",
    "min-form": "min_form",
    "all": "all",
}

DEFAULT_PORT = 8707


def _parse_range(_ctx, _param, value):
    if value is None:
        return None
    try:
        lo_s, hi_s = value.split(":")
        lo, hi = float(lo_s), float(hi_s)
    except ValueError:
        raise click.BadParameter("expected MIN:MAX")
    if not lo < hi:
        raise click.BadParameter("MIN must be strictly less than MAX")
    return (lo, hi)


def _parse_channel(_ctx, _param, value):
    if value is None or value == "luma":
        return value
    try:
        return int(value)
    except ValueError:
        raise click.BadParameter("expected a channel index or 'luma'")


def shared_options(fn):
    decorators = [
        click.option("--mask", "mask_path", required=True, type=click.Path(), help="Class-id label mask PNG."),
        click.option("--domain-range", callback=_parse_range, default=None, metavar="MIN:MAX",
                      help="Nominal value range for PC (and quantization range for float images)."),
        click.option("--quant-bins", default=256, show_default=True, help="Uniform bins for float images."),
        click.option("--tie-break", type=click.Choice(TIE_BREAKS), default="lowest", show_default=True),
        click.option("--unseen", type=click.Choice(UNSEEN_POLICIES), default="unassigned", show_default=True,
                      help="How to classify levels never seen in any labeled class."),
        click.option("--channel", callback=_parse_channel, default=None, metavar="{index|luma}",
                      help="Channel selection for multi-channel images."),
        click.option("--report", "report_path", type=click.Path(), default=None,
                      help="Write the JSON report document here."),
        click.option("--path", "path_name", type=click.Choice(sorted(_PATH_CHOICES)), default="histogram-l1",
                      show_default=True, help="Compute path ('all' cross-checks every path)."),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


def handles_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (InputError, FileNotFoundError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        except ComputationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_COMPUTE)

    return wrapper


@click.group()
@click.version_option(package_name="npcontrast")
def main():
    """Normalized potential contrast: metrics, binarization, segmentation,
    band ranking, and the interactive labeling service."""


def _settings_dict(quant_bins, domain_range, tie_break, unseen, channel, path_name):
    return {
        "quant_bins": quant_bins,
        "domain_range": list(domain_range) if domain_range else None,
        "tie_break": tie_break,
        "unseen": unseen,
        "channel": channel,
        "path": path_name,
    }


def _quant_config(quant_bins, domain_range):
    if domain_range is not None:
        return imageio.QuantizationConfig(bins=quant_bins, low=domain_range[0], high=domain_range[1])
    return imageio.QuantizationConfig(bins=quant_bins)


def _load_pair(image_path, mask_path, quant_bins, domain_range, channel):
    image = imageio.load_image(
        image_path,
        quant=_quant_config(quant_bins, domain_range),
        channel=channel,
        nominal_range=domain_range,
    )
    mask = imageio.load_label_mask(mask_path, image)
    if mask.n_classes < 2:
        raise InputError("need at least two labeled classes to measure contrast")
    return image, mask


def _echo_results(res: dict) -> None:
    click.echo(f"npc = {report.significant(res['npc'])}")
    lo, hi = res["nominal_range"]
    click.echo(f"pc  = {report.significant(res['pc'])} (nominal range [{lo:g}, {hi:g}])")
    for cid, err in res["per_class_error"].items():
        click.echo(f"class {cid} error rate = {report.significant(err)}")
    if res.get("pairwise"):
        click.echo("pairwise npc:")
        for cid, row in zip(res["pairwise_class_ids"], res["pairwise"]):
            cells = "  ".join(f"{v:.6f}" for v in row)
            click.echo(f"  class {cid}: {cells}")


@main.command("npc")
@click.argument("image_path", type=click.Path())
@shared_options
@handles_errors
def cmd_npc(image_path, mask_path, domain_range, quant_bins, tie_break, unseen, channel, report_path, path_name):
    """Compute NPC/PC and per-class error rates for a labeled image."""
    image, mask = _load_pair(image_path, mask_path, quant_bins, domain_range, channel)
    dists = imageio.class_distributions(image, mask)
    contrast = metrics.compute_contrast_report(
        dists,
        path=_PATH_CHOICES[path_name],
        tie_break=tie_break,
        unseen_policy=unseen,
    )
    results = report.results_dict(contrast, image.domain)
    _echo_results(results)
    if report_path:
        doc = report.make_document(
            "npc",
            inputs={"image": report.input_entry(image_path), "mask": report.input_entry(mask_path)},
            settings=_settings_dict(quant_bins, domain_range, tie_break, unseen, channel, path_name),
            results=results,
        )
        report.write_document(doc, report_path)


@main.command("segment")
@click.argument("image_path", type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path(), help="Output class-id mask PNG.")
@click.option("--preview", "preview_path", type=click.Path(), default=None, help="Optional colorized preview PNG.")
@shared_options
@handles_errors
def cmd_segment(image_path, out_path, preview_path, mask_path, domain_range, quant_bins, tie_break,
                unseen, channel, report_path, path_name):
    """Segment an image with the optimal value-to-class rule induced by its
    labeled classes, writing the result as a class-id mask."""
    image, mask = _load_pair(image_path, mask_path, quant_bins, domain_range, channel)
    dists = imageio.class_distributions(image, mask)
    contrast = metrics.compute_contrast_report(
        dists,
        path=_PATH_CHOICES[path_name],
        tie_break=tie_break,
        unseen_policy=unseen,
    )
    lut = metrics.optimal_segmentation_lut(dists, tie_break=tie_break, unseen_policy=unseen)
    segmented = imageio.segment_image(image, lut)
    imageio.save_label_mask(segmented, out_path)
    if preview_path:
        imageio.save_colorized_mask(segmented, preview_path)
    results = report.results_dict(contrast, image.domain)
    results["lut"] = report.lut_dict(lut)
    _echo_results(results)
    click.echo(f"wrote {out_path}")
    if report_path:
        doc = report.make_document(
            "segment",
            inputs={"image": report.input_entry(image_path), "mask": report.input_entry(mask_path)},
            settings=_settings_dict(quant_bins, domain_range, tie_break, unseen, channel, path_name),
            results=results,
            outputs={"mask": str(out_path), "preview": str(preview_path) if preview_path else None},
        )
        report.write_document(doc, report_path)


@main.command("pairwise")
@click.argument("image_path", type=click.Path())
@shared_options
@handles_errors
def cmd_pairwise(image_path, mask_path, domain_range, quant_bins, tie_break, unseen, channel,
                 report_path, path_name):
    """Two-class NPC for every pair of labeled classes."""
    image, mask = _load_pair(image_path, mask_path, quant_bins, domain_range, channel)
    dists = imageio.class_distributions(image, mask)
    contrast = metrics.compute_contrast_report(
        dists,
        path=_PATH_CHOICES[path_name],
        tie_break=tie_break,
        unseen_policy=unseen,
        include_pairwise=True,
    )
    results = report.results_dict(contrast, image.domain)
    _echo_results(results)
    if report_path:
        doc = report.make_document(
            "pairwise",
            inputs={"image": report.input_entry(image_path), "mask": report.input_entry(mask_path)},
            settings=_settings_dict(quant_bins, domain_range, tie_break, unseen, channel, path_name),
            results=results,
        )
        report.write_document(doc, report_path)


@main.command("rank-bands")
@click.argument("manifest_path", type=click.Path())
@shared_options
@handles_errors
def cmd_rank_bands(manifest_path, mask_path, domain_range, quant_bins, tie_break, unseen, channel,
                   report_path, path_name):
    """Rank the bands of a spectral stack by per-band NPC, best first."""
    quant = _quant_config(quant_bins, domain_range)
    stack = imageio.load_stack(manifest_path, quant=quant, channel=channel, nominal_range=domain_range)
    mask = imageio.load_label_mask(mask_path, stack.bands[0])
    if mask.n_classes < 2:
        raise InputError("need at least two labeled classes to rank bands")
    entries = []
    for order, (band, name) in enumerate(zip(stack.bands, stack.band_names)):
        dists = imageio.class_distributions(band, mask)
        contrast = metrics.compute_contrast_report(
            dists,
            path=_PATH_CHOICES[path_name],
            tie_break=tie_break,
            unseen_policy=unseen,
        )
        band_results = report.results_dict(contrast, band.domain)
        band_results["band"] = name
        entries.append((order, band_results))
    # Descending NPC; the stable sort keeps manifest order on ties.
    entries.sort(key=lambda pair: -pair[1]["npc"])
    ranking = [res for _, res in entries]
    for res in ranking:
        click.echo(f"{res['band']}: npc = {report.significant(res['npc'])}")
    click.echo(f"best band: {ranking[0]['band']}")
    if report_path:
        doc = report.make_document(
            "rank-bands",
            inputs={"manifest": report.input_entry(manifest_path), "mask": report.input_entry(mask_path)},
            settings=_settings_dict(quant_bins, domain_range, tie_break, unseen, channel, path_name),
            results={"ranking": ranking, "best_band": ranking[0]["band"]},
        )
        report.write_document(doc, report_path)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=DEFAULT_PORT, show_default=True,
              help="TCP port; 0 asks the OS for a free port (printed on startup).")
@click.option("--ui-dir", type=click.Path(), default=None,
              help="Directory with the built labeling UI (defaults to ./frontend/dist when present).")
@click.option("--session-ttl", default=3600, show_default=True, help="Idle session expiry, seconds.")
@click.option("--persist-dir", type=click.Path(), default=None,
              help="Snapshot session image and mask under this directory.")
@click.option("--max-upload-mb", default=32, show_default=True)
def cmd_serve(host, port, ui_dir, session_ttl, persist_dir, max_upload_mb):
    """Run the interactive labeling service (HTTP + the browser UI)."""
    from . import service

    app = service.create_app(
        ui_dir=service.default_ui_dir() if ui_dir is None else ui_dir,
        session_ttl=session_ttl,
        persist_dir=persist_dir,
        max_upload_bytes=max_upload_mb * 1024 * 1024,
    )
    try:
        service.run_server(app, host=host, port=port)
    except OSError as exc:
        click.echo(f"error: cannot bind {host}:{port}: {exc}", err=True)
        sys.exit(EXIT_ENV)


if __name__ == "__main__":
    main()
