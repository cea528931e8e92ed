import shutil
import subprocess
from pathlib import Path

import pytest

from qkdfigures import FIGURES, FigureError, FigureSpec, load_sweep_csv, render
from qkdfigures.cli import main

HEADER = (
    "scenario,theta_deg,L_m,eta_geo,eta_scatt,eta_turb,eta_bw,eta_total,"
    "stray_per_window,p_click,p_coin,qber_bb84,rate_bb84,qber_b92,rate_b92,"
    "qber_bbm92,rate_bbm92,qber_e91,rate_e91"
)


def _have_qkdlink() -> bool:
    return shutil.which("qkdlink") is not None


def _synthetic_row(scenario: str, theta: float, qber: float, rate: float) -> str:
    eta = max(1e-9, 0.05 * (1.0 - theta / 100.0))
    cells = [
        scenario,
        f"{theta}",
        f"{5e5 / max(0.1, 1.0 - theta / 90.0)}",
        "0.01",
        "0.5",
        "0.2",
        "1",
        f"{eta}",
        "2e-6",
        "1e-4",
        "1e-3",
        f"{qber}",
        f"{rate}",
        f"{qber * 0.9}",
        f"{rate * 0.5}",
        f"{qber * 0.8}",
        f"{rate * 4.0}",
        f"{qber * 0.78}",
        f"{rate * 2.5}",
    ]
    return ",".join(cells)


@pytest.fixture()
def synthetic_csv(tmp_path) -> Path:
    lines = [HEADER]
    for scenario in ("uplink-night", "downlink-night", "downlink-day"):
        for i, theta in enumerate(range(0, 90, 10)):
            qber = 0.02 + 0.004 * i
            rate = 1e-4 / (i + 1.0)
            lines.append(_synthetic_row(scenario, float(theta), qber, rate))
    path = tmp_path / "sweep.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture(scope="session")
def real_csv(tmp_path_factory) -> Path:
    """A genuine sweep from the simulator CLI when it is installed."""
    if not _have_qkdlink():
        pytest.skip("qkdlink CLI not installed in this environment")
    path = tmp_path_factory.mktemp("sweep") / "real.csv"
    subprocess.run(
        ["qkdlink", "sweep", "--theta-range", "0:85:5", "--out", str(path)],
        check=True,
    )
    return path


def test_loader_rejects_missing_column(tmp_path, synthetic_csv):
    broken = tmp_path / "broken.csv"
    lines = synthetic_csv.read_text().splitlines()
    # drop the last column (qber_e91 stays, rate_e91 goes; then rename)
    header = lines[0].replace(",qber_e91", "")
    rows = [",".join(l.split(",")[:-2] + [l.split(",")[-1]]) for l in lines[1:]]
    broken.write_text("\n".join([header] + rows) + "\n")
    with pytest.raises(FigureError, match="qber_e91"):
        load_sweep_csv(broken)


def test_loader_rejects_empty_table(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text(HEADER + "\n")
    with pytest.raises(FigureError, match="no plottable rows"):
        load_sweep_csv(empty)


def test_loader_drops_nan_rows(tmp_path, synthetic_csv):
    mixed = tmp_path / "mixed.csv"
    lines = synthetic_csv.read_text().splitlines()
    nan_row = "uplink-night,85," + ",".join(["nan"] * 17)
    mixed.write_text("\n".join(lines + [nan_row]) + "\n")
    rows = load_sweep_csv(mixed)
    assert all(r["theta_deg"] != 85 for r in rows if r["scenario"] == "uplink-night")


def test_all_five_families_render_png_and_svg(tmp_path, synthetic_csv):
    for figure in FIGURES:
        for ext in ("png", "svg"):
            out = tmp_path / f"{figure}.{ext}"
            result = render(FigureSpec(str(synthetic_csv), figure, str(out)))
            assert result == out
            assert out.stat().st_size > 1000


def test_unknown_figure_and_format_rejected(tmp_path, synthetic_csv):
    with pytest.raises(FigureError, match="unknown figure"):
        render(FigureSpec(str(synthetic_csv), "fig7", str(tmp_path / "x.png")))
    with pytest.raises(FigureError, match="unsupported output format"):
        render(FigureSpec(str(synthetic_csv), "bb84", str(tmp_path / "x.pdf")))


def test_rendering_is_deterministic(tmp_path, synthetic_csv):
    for ext in ("png", "svg"):
        a = tmp_path / f"a.{ext}"
        b = tmp_path / f"b.{ext}"
        render(FigureSpec(str(synthetic_csv), "bb84", str(a)))
        render(FigureSpec(str(synthetic_csv), "bb84", str(b)))
        assert a.read_bytes() == b.read_bytes()


def test_hand_edited_csv_changes_pixels(tmp_path, synthetic_csv):
    from PIL import Image

    base = tmp_path / "base.png"
    render(FigureSpec(str(synthetic_csv), "bb84", str(base)))

    lines = synthetic_csv.read_text().splitlines()
    cells = lines[1].split(",")
    cells[11] = "0.45"  # qber_bb84 of the first row
    lines[1] = ",".join(cells)
    edited = tmp_path / "edited.csv"
    edited.write_text("\n".join(lines) + "\n")
    bumped = tmp_path / "bumped.png"
    render(FigureSpec(str(edited), "bb84", str(bumped)))

    with Image.open(base) as im_a, Image.open(bumped) as im_b:
        assert im_a.size == im_b.size
        assert im_a.tobytes() != im_b.tobytes()


def test_unrelated_column_edit_leaves_figure_alone(tmp_path, synthetic_csv):
    # the bb84 figure reads only its own columns: editing e91 data must
    # not change it (no hidden recomputation from other columns)
    base = tmp_path / "base.png"
    render(FigureSpec(str(synthetic_csv), "bb84", str(base)))
    lines = synthetic_csv.read_text().splitlines()
    cells = lines[1].split(",")
    cells[17] = "0.3"  # qber_e91
    lines[1] = ",".join(cells)
    edited = tmp_path / "edited.csv"
    edited.write_text("\n".join(lines) + "\n")
    other = tmp_path / "other.png"
    render(FigureSpec(str(edited), "bb84", str(other)))
    assert base.read_bytes() == other.read_bytes()


def test_cli_exit_codes(tmp_path, synthetic_csv, capsys):
    out = tmp_path / "fig.png"
    assert main(["--input", str(synthetic_csv), "--figure", "e91", "--out", str(out)]) == 0
    assert out.exists()
    assert main(["--input", str(tmp_path / "missing.csv"), "--figure", "e91",
                 "--out", str(out)]) == 3
    empty = tmp_path / "empty.csv"
    empty.write_text(HEADER + "\n")
    code = main(["--input", str(empty), "--figure", "e91", "--out", str(out)])
    assert code == 2
    assert "no plottable rows" in capsys.readouterr().err


def test_real_sweep_renders_monotone_transmittance(tmp_path, real_csv):
    out = tmp_path / "transmittance.png"
    render(FigureSpec(str(real_csv), "transmittance", str(out)))
    assert out.stat().st_size > 1000
    rows = load_sweep_csv(real_csv)
    by_scenario = {}
    for row in rows:
        by_scenario.setdefault(row["scenario"], []).append(row)
    assert len(by_scenario) == 3
    for series in by_scenario.values():
        series.sort(key=lambda r: r["theta_deg"])
        etas = [r["eta_total"] for r in series]
        assert all(b <= a * (1 + 1e-9) for a, b in zip(etas[:-1], etas[1:]))


def test_real_sweep_all_figures(tmp_path, real_csv):
    for figure in FIGURES:
        out = tmp_path / f"{figure}.png"
        render(FigureSpec(str(real_csv), figure, str(out)))
        assert out.stat().st_size > 1000
