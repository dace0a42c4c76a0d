import numpy as np
import pytest

from largesol import ConfigurationError, DomainError, Table, load_table
from largesol.tables import write_table


def test_load_table(tmp_path):
    path = tmp_path / "phi.txt"
    path.write_text("# t, phi\n1, 2\n2 4  # inline comment\n\n4,8\n")
    table = load_table(str(path))
    assert table.t.tolist() == [1.0, 2.0, 4.0]
    assert table.values.tolist() == [2.0, 4.0, 8.0]
    assert repr(table) == f"<Table: 3 rows from {str(path)!r}>"


def test_load_table_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_table(str(tmp_path / "missing.txt"))

    path = tmp_path / "bad.txt"
    path.write_text("1 2\n2 3 4\n")
    with pytest.raises(ConfigurationError, match="bad.txt:2"):
        load_table(str(path))

    path.write_text("1 2\nx 3\n")
    with pytest.raises(ConfigurationError, match="not a number"):
        load_table(str(path))

    path.write_text("2 2\n1 3\n")
    with pytest.raises(ConfigurationError, match="strictly increasing"):
        load_table(str(path))

    path.write_text("# nothing\n")
    with pytest.raises(ConfigurationError, match="no rows"):
        load_table(str(path))


def test_table_validation():
    with pytest.raises(DomainError):
        Table([1.0], [1.0])
    with pytest.raises(DomainError):
        Table([1.0, 2.0], [1.0, np.inf])
    with pytest.raises(DomainError):
        Table([1.0, 2.0, 3.0], [1.0, 2.0])


def test_loglog_power_law():
    t = np.logspace(-2.0, 2.0, 17)
    evaluate = Table(t, 3.0 * t**1.5).loglog()
    samples = np.array([1e-4, 0.37, 5.0, 1e4])
    assert evaluate(samples) == pytest.approx(3.0 * samples**1.5, rel=1e-10)


def test_loglog_needs_positive_values():
    with pytest.raises(DomainError):
        Table([0.0, 1.0], [1.0, 2.0]).loglog()


def test_linear_tails():
    table = Table([0.0, 1.0, 2.0], [0.0, 1.0, 2.0])
    assert table.linear()(np.array([-1.0, 1.5, 4.0])) == pytest.approx([0.0, 1.5, 4.0])
    assert table.linear(tail="constant")(np.array([4.0])) == pytest.approx([2.0])


def test_write_then_load(tmp_path):
    table = Table([0.1, 0.2, 0.7], [1.0 / 3.0, 2.0 / 3.0, np.pi])
    path = str(tmp_path / "out.table")
    write_table(table, path)
    assert load_table(path) == table
