"""Rendering from the reference CSVs produced by the primary suite: every
figure kind draws without error, errors are clean, and the plotted series
are a pure function of the CSV."""

from pathlib import Path

import pytest

from raqprep_plots.cli import cli_run
from raqprep_plots.figures import FigureSpec, RenderError, extract_series, render

DATA = Path(__file__).parent / "data"

CASES = [
    ("alpha_vs_M", DATA / "fig3a_summary.csv"),
    ("alpha_vs_poolsize", DATA / "fig3b_summary.csv"),
    ("scaling_inset", DATA / "fig3_insets_summary.csv"),
    ("difference_inset", DATA / "fig2_difference.csv"),
]


@pytest.mark.parametrize("kind,csv_path", CASES, ids=[c[0] for c in CASES])
def test_render_all_kinds(kind, csv_path, tmp_path):
    out = tmp_path / f"{kind}.png"
    result = render(FigureSpec(kind=kind, csv_path=csv_path, output_path=out))
    assert result == out
    assert out.exists() and out.stat().st_size > 1000


def test_render_pdf_and_svg(tmp_path):
    for ext in ("pdf", "svg"):
        out = tmp_path / f"fig.{ext}"
        render(FigureSpec("alpha_vs_M", DATA / "fig3a_summary.csv", out))
        assert out.exists()


def test_rendering_is_pure_function_of_csv():
    spec = FigureSpec("alpha_vs_M", DATA / "fig3a_summary.csv", Path("unused.png"))
    assert extract_series(spec) == extract_series(spec)
    series = extract_series(spec)
    assert set(series) == {"haar", "two_design", "pool"}


def test_difference_series_content():
    spec = FigureSpec("difference_inset", DATA / "fig2_difference.csv", Path("u.png"))
    series = extract_series(spec)
    assert {"Haar", "2-design"} <= set(series)


def test_missing_column_named(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("strategy,M_checkpoint\nhaar,10\n")
    with pytest.raises(RenderError, match="mean_alpha"):
        render(FigureSpec("alpha_vs_M", bad, tmp_path / "x.png"))
    assert not (tmp_path / "x.png").exists()


def test_empty_csv_is_clean_error(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("strategy,M_checkpoint,mean_alpha,stderr_alpha\n")
    out = tmp_path / "y.png"
    with pytest.raises(RenderError, match="no data rows"):
        render(FigureSpec("alpha_vs_M", empty, out))
    assert not out.exists()


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(RenderError, match="unknown figure kind"):
        FigureSpec("pie_chart", DATA / "fig3a_summary.csv", tmp_path / "z.png")


def test_cli_positional(tmp_path):
    out = tmp_path / "cli.png"
    code = cli_run(["alpha_vs_M", str(DATA / "fig3a_summary.csv"), str(out)])
    assert code == 0 and out.exists()


def test_cli_spec_file(tmp_path):
    spec_file = tmp_path / "fig.cfg"
    spec_file.write_text(f"""
[figure]
kind = difference_inset
csv = {DATA / 'fig2_difference.csv'}
out = out/fig2.png
title = paired comparison
""")
    assert cli_run(["render", "--spec", str(spec_file)]) == 0
    assert (tmp_path / "out" / "fig2.png").exists()


def test_cli_errors(tmp_path):
    assert cli_run([]) == 1
    assert cli_run(["render", "--spec", str(tmp_path / "missing.cfg")]) == 1
    assert cli_run(["bogus_kind", "a.csv", "b.png"]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("strategy,M_checkpoint\nhaar,10\n")
    assert cli_run(["alpha_vs_M", str(bad), str(tmp_path / "c.png")]) == 2
    spec_file = tmp_path / "bad.cfg"
    spec_file.write_text("[figure]\nkind = alpha_vs_M\ncsv = x.csv\n")  # missing out
    assert cli_run(["render", "--spec", str(spec_file)]) == 1
