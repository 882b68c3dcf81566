from fractions import Fraction

import pytest

from stagegraph.analytics import (
    StageChange,
    build_matrix,
    direction_of,
    export_matrix,
    parse_matrix,
)
from stagegraph.ontology import STAGE_ORDER


def change(patient, from_code, to_code):
    return StageChange(patient, from_code, to_code, direction_of(from_code, to_code))


def test_direction_exhaustive_over_all_pairs():
    for i, from_code in enumerate(STAGE_ORDER):
        for j, to_code in enumerate(STAGE_ORDER):
            got = direction_of(from_code, to_code)
            if i < j:
                assert got == "up"
            elif i > j:
                assert got == "down"
            else:
                assert got == "none"


def test_iiia_to_iib_is_down():
    assert direction_of("IIIA", "IIB") == "down"


def test_two_stage_iv_patients():
    matrix = build_matrix([change("p1", "IV", "IV"), change("p2", "IV", "IV")])
    iv = STAGE_ORDER.index("IV")
    assert matrix.counts[iv][iv] == 2
    assert matrix.row_percent[iv][iv] == Fraction(1)
    assert sum(map(sum, matrix.counts)) == 2


def test_defined_rows_sum_to_one():
    changes = [change("p1", "IIB", "IB"), change("p2", "IIB", "IIA"), change("p3", "IIB", "IIB")]
    matrix = build_matrix(changes)
    iib = STAGE_ORDER.index("IIB")
    assert sum(matrix.row_percent[iib]) == Fraction(1)
    assert abs(float(sum(matrix.row_percent[iib])) - 1.0) < 1e-9


def test_empty_rows_are_undefined_not_zero():
    matrix = build_matrix([])
    for row in matrix.row_percent:
        assert row == [None] * 9
    assert all(cell == 0 for row in matrix.counts for cell in row)


def test_conservation_with_exclusions():
    changes = [change("p1", "IA", "IA")]
    exclusions = (("p2", "no AJCC8 stage"), ("p3", "no AJCC7 stage and no AJCC8 stage"))
    matrix = build_matrix(changes, exclusions)
    assert matrix.total() + matrix.unstaged == 3


def test_csv_export_has_header_plus_nine_rows():
    matrix = build_matrix([])
    text = export_matrix(matrix, "csv")
    lines = text.strip().splitlines()
    assert len(lines) == 10
    assert lines[0] == "from/to," + ",".join(STAGE_ORDER)


def test_json_round_trip():
    changes = [
        change("p1", "IIB", "IB"),
        change("p2", "IIB", "IIIA"),
        change("p3", "0", "0"),
        change("p4", "IV", "IV"),
    ]
    matrix = build_matrix(changes, (("p5", "no AJCC8 stage"),))
    again = parse_matrix(export_matrix(matrix, "json"))
    assert again == matrix


def test_unknown_format_rejected():
    with pytest.raises(Exception):
        export_matrix(build_matrix([]), "xml")
