"""Tests for SVG panels and log-log plots."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from matscale.exceptions import ContractError
from matscale.models.prediction import EFSPrediction
from matscale.scaling.fit import fit_power_law
from matscale.viz import Curve, emit_loglog_plot, force_scale, loglog_csv, render_material_panel, write_loglog_plot
from matscale.viz.loglog import decade_range
from matscale.viz.panel import ARROW_FRACTION, PanelFrame


def _ids(svg: str, prefix: str) -> list[str]:
    """Ids of every element starting with ``prefix``; parsing also checks well-formedness."""
    root = ET.fromstring(svg.encode("utf-8"))
    return [el.get("id", "") for el in root.iter() if el.get("id", "").startswith(prefix)]


def _prediction(record, scale: float = 1.0) -> EFSPrediction:
    return EFSPrediction(energy=record.energy * scale, forces=record.forces * scale, stress=record.stress * scale)


class TestMaterialPanel:
    """Actual-versus-predicted panels."""

    def test_one_atom_per_panel(self, record) -> None:
        svg = render_material_panel(record, _prediction(record, 0.5))
        assert len(_ids(svg, "atom-actual-")) == record.n_atoms
        assert len(_ids(svg, "atom-predicted-")) == record.n_atoms

    def test_zero_forces_draw_no_arrows(self, record) -> None:
        still = record.model_copy(update={"forces": np.zeros_like(record.forces)})
        svg = render_material_panel(still, _prediction(still))
        assert _ids(svg, "force-arrow") == []
        assert "force scale: n/a" in svg

    def test_arrows_for_nonzero_forces(self, record) -> None:
        svg = render_material_panel(record, _prediction(record))
        arrows = _ids(svg, "force-arrow")
        assert 0 < len(arrows) <= 2 * record.n_atoms
        assert len(_ids(svg, "force-arrow-actual-")) == len(_ids(svg, "force-arrow-predicted-"))

    def test_energy_and_stress_are_printed(self, record) -> None:
        svg = render_material_panel(record, _prediction(record, 2.0))
        assert f"E = {record.energy:.4f} eV" in svg
        assert f"E = {2.0 * record.energy:.4f} eV" in svg
        assert svg.count("stress (eV/A^3)") == 2
        assert _ids(svg, "energy-") == ["energy-actual", "energy-predicted"]

    def test_deterministic(self, record) -> None:
        prediction = _prediction(record, 0.5)
        assert render_material_panel(record, prediction) == render_material_panel(record, prediction)

    def test_standalone_document(self, record) -> None:
        svg = render_material_panel(record, _prediction(record))
        assert svg.startswith("<?xml")
        assert ET.fromstring(svg.encode("utf-8")).tag == "{http://www.w3.org/2000/svg}svg"

    def test_atom_count_mismatch(self, record, record_factory) -> None:
        with pytest.raises(ContractError):
            render_material_panel(record, _prediction(record_factory(2, seed=3)))

    def test_force_scale_uses_longest_projection(self) -> None:
        actual = np.array([[3.0, 4.0, 100.0]])
        predicted = np.array([[1.0, 0.0, 0.0]])
        assert force_scale(actual, predicted, 8.0) == pytest.approx(ARROW_FRACTION * 8.0 / 5.0)
        assert force_scale(np.zeros((2, 3)), np.zeros((2, 3)), 8.0) is None

    def test_frame_covers_atoms(self) -> None:
        positions = np.array([[0.0, 0.0, 0.0], [4.0, 1.0, 2.0]])
        frame = PanelFrame(positions)
        assert frame.width == pytest.approx(6.4)
        np.testing.assert_allclose(frame.center, [2.0, 0.5])
        assert frame.radii[1] > frame.radii[0]


class TestLogLogPlot:
    """Scaling plots."""

    def test_one_line_and_legend_entry_per_curve(self) -> None:
        curves = [Curve("small", [(1e3, 5.0), (1e4, 3.0)]), Curve("large", [(1e3, 4.0), (1e5, 1.5)])]
        svg = emit_loglog_plot(curves, "D")
        assert _ids(svg, "curve-") == ["curve-0", "curve-1"]
        assert ">small<" in svg and ">large<" in svg
        assert _ids(svg, "fit") == []

    def test_decade_ticks(self) -> None:
        svg = emit_loglog_plot([Curve("transformer", [(1e13, 9.0), (1e17, 2.0)])], "C")
        assert len(_ids(svg, "xtick_")) == 5
        for k in range(13, 18):
            assert f">1e{k}<" in svg

    def test_fit_line_and_legend(self) -> None:
        fit = fit_power_law([(1e3, 12.5), (1e4, 7.16), (1e5, 4.10)], axis="D")
        svg = emit_loglog_plot([Curve("runs", fit.points)], "D", fit=fit)
        assert _ids(svg, "fit") == ["fit"]
        assert f"beta = {fit.beta:.4g}" in svg
        assert f"alpha = {fit.alpha:.4g}" in svg

    def test_deterministic(self) -> None:
        curves = [Curve("runs", [(1e3, 5.0), (1e4, 3.0), (1e5, 2.0)])]
        assert emit_loglog_plot(curves, "D") == emit_loglog_plot(curves, "D")

    def test_non_positive_point_names_curve(self) -> None:
        with pytest.raises(ContractError, match="broken") as exc_info:
            emit_loglog_plot([Curve("ok", [(1.0, 1.0)]), Curve("broken", [(10.0, 0.0)])], "D")
        assert exc_info.value.details["curve"] == "broken"

    def test_empty_curve(self) -> None:
        with pytest.raises(ContractError, match="no points"):
            emit_loglog_plot([Curve("empty", [])], "D")

    @pytest.mark.parametrize(
        ("values", "expected"), [([1e13, 1e17], (13, 17)), ([2.0, 30.0], (0, 2)), ([5.0], (0, 1)), ([1.0], (0, 1))]
    )
    def test_decade_range(self, values: list[float], expected: tuple[int, int]) -> None:
        assert decade_range(values) == expected

    def test_csv(self) -> None:
        fit = fit_power_law([(1e3, 12.5), (1e4, 7.16), (1e5, 4.10)], axis="D")
        text = loglog_csv([Curve("runs", [(1e4, 7.16), (1e3, 12.5)])], fit)
        lines = text.splitlines()
        assert lines[0] == "series,x,y"
        assert lines[1] == "runs,1000.0,12.5"
        assert lines[2] == "runs,10000.0,7.16"
        assert [line.split(",")[0] for line in lines[3:]] == ["fit", "fit"]

    def test_write_plot(self, tmp_path: Path) -> None:
        svg_path, csv_path = write_loglog_plot(tmp_path / "plots" / "data.svg", [Curve("runs", [(1.0, 2.0)])], "D")
        assert svg_path.read_text(encoding="utf-8").startswith("<?xml")
        assert csv_path == tmp_path / "plots" / "data.csv"
        assert csv_path.exists()
