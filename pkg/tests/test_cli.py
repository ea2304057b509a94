import io
import json
import subprocess
import sys

import pytest

from polysplay import cli
from polysplay import diagram as dg


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def lines(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return out.splitlines()


VERBS = {
    "algebra", "reduce", "splicings", "diagram-check", "generators", "domains",
    "index", "splay", "decompose", "assemble", "verify", "kappa",
}


def test_verb_table_covers_every_command():
    assert set(cli.VERBS) == VERBS
    parser = cli.build_parser()
    (sub,) = [a for a in parser._actions if a.dest == "verb"]
    assert set(sub.choices) == VERBS
    # no two verbs share a handler
    assert len(set(cli.VERBS.values())) == len(VERBS)


def test_algebra():
    assert lines("algebra", "mul", "r1", "r2") == ["r12"]
    assert lines("algebra", "mul", "r2", "r1") == ["0"]
    assert lines("algebra", "homology", "r123") == ["r123: (1, 1, 1)"]
    table = lines("algebra", "table")
    assert len(table) == 18


def test_reduce():
    assert lines("reduce", "--mode", "123", "r1.r23") == ["r123"]
    assert lines("reduce", "r1.r2.r3") == ["r123"]
    assert call("reduce", "r1.r2", "--compare", "r2.r1")[0] == 1


def test_splicings():
    assert lines("splicings", "--interleavings", "r1|r2") == ["[1:1,2:1]", "[2:1,1:1]"]
    assert len(lines("splicings", "r1.r2|r3.r2", "--columns", "3")) == 6
    out = lines("splicings", "r1.r2|r3", "--shippings", "1", "--sigma", "[1:1,1:2,2:1]")
    assert out == ["[1:1,1:2,2:1] : boat r1.r2|- [1:1,1:2] ; anchor -|r3 [2:1] ; k'=1"]


def test_diagram_check(data_dir):
    code, out, _ = call("diagram-check", data_dir / "hopf_basic.diagram")
    assert code == 0 and "kind: closed" in out
    assert call("diagram-check", data_dir / "torus_parallel.diagram")[0] == 1


def test_generators_and_domains(data_dir):
    assert lines("generators", data_dir / "hopf_basic.diagram") == ["p1", "p2", "p3", "p4"]
    assert lines("domains", data_dir / "hopf_basic.diagram") == ["periodic C:-1,O:1"]
    found = lines("domains", data_dir / "hopf_bordered.diagram", "p1,q1,q2", "p2,q1,q2", "--max-total", "2")
    assert "R2:1,R9:1 ; e=-1" in found


def test_index(data_dir):
    assert lines("index", data_dir / "hopf_bordered.diagram", "--domain", "R13:1", "--chi", "1", "--rho", "r3|-") == [
        "2"
    ]


def test_splay_writes_a_diagram(data_dir, tmp_path):
    target = tmp_path / "splay.diagram"
    out = lines("splay", data_dir / "hopf_basic.diagram", "--rows", "mm,lm", "-o", target)
    assert out == ["# theta+ 1,2: e1_1_2,ta1B_1_2,tam2B_1_2"]
    D = dg.load_diagram(target)
    assert D.systems == [0, 1, 2]
    border = tmp_path / "border.diagram"
    lines("splay", data_dir / "hopf_basic.diagram", "--border", "-o", border)
    assert dg.load_diagram(border).kind == "bordered"


def test_decompose():
    assert lines("decompose", "reeb", "ml", "0,0,1,0") == ["r1"]
    assert call("decompose", "reeb", "ml", "0,0,0,0")[0] == 1
    assert lines("decompose", "easterly", "mlm", "mmm") == ["rho1rho2_composition(1) ; count 1"]
    assert lines("decompose", "easterly", "ml", "mm", "--rho=-|r1") == ["collision ; count 1"]
    assert lines("decompose", "anchor", "r1", "r123") == ["r1 ; count 1", "r123 ; count 1"]
    assert call("decompose", "anchor", "r4")[0] == 2


def test_assemble_and_verify(data_dir):
    D, T = data_dir / "hopf_bordered.diagram", data_dir / "hopf_k0.counts"
    out = lines("assemble", D, T)
    assert len(out) == 6 and "p1,q1,q2 ; r12|- ; p2,q1,q2" in out
    assert len(lines("assemble", D, T, "--partial")) == 6
    assert lines("verify", D, T, "--max-length", "3") == ["checked 4656 inputs, 0 residuals"]


def test_verify_reports_residuals(data_dir, tmp_path):
    text = (data_dir / "hopf_k0.counts").read_text().splitlines()
    body = [l for l in text if l and not l.startswith("#")]
    bad = tmp_path / "bad.counts"
    bad.write_text("\n".join(body[1:]) + "\n")
    code, out, _ = call("verify", data_dir / "hopf_bordered.diagram", bad, "--max-length", "2")
    assert code == 1
    assert out.splitlines()[0].startswith("residual ")


def test_kappa(data_dir):
    assert lines("kappa", data_dir / "hopf_bordered.diagram") == ["6"]
    # a basic diagram with stabilisation data is bordered first
    assert lines("kappa", data_dir / "hopf_basic.diagram") == ["6"]
    assert call("kappa", data_dir / "torus_parallel.diagram")[0] == 1


def test_machine_mode(data_dir):
    out = lines("--report", "machine", "verify", data_dir / "hopf_bordered.diagram", data_dir / "hopf_k0.counts",
                "--max-length", "2")
    records = [json.loads(l) for l in out]
    assert records[-1] == {"checked": records[-1]["checked"], "residuals": 0}
    for l in lines("--report", "machine", "assemble", data_dir / "hopf_bordered.diagram", data_dir / "hopf_k0.counts"):
        rec = json.loads(l)
        assert set(rec) == {"x", "rho", "value"}
        assert l == json.dumps(rec, sort_keys=True)


def test_input_errors_exit_two(data_dir, tmp_path):
    assert call("reduce", "r9")[0] == 2
    code, _, err = call("generators", tmp_path / "missing.diagram")
    assert code == 2 and "missing.diagram" in err
    assert call("no-such-verb")[0] == 2
    broken = tmp_path / "broken.diagram"
    broken.write_text((data_dir / "hopf_basic.diagram").read_text().replace("chi=1", "chi=7", 1))
    code, _, err = call("diagram-check", broken)
    assert code == 2 and "broken.diagram:" in err


def test_count_table_errors_name_the_line(data_dir, tmp_path):
    bad = tmp_path / "bad.counts"
    bad.write_text("# header\np1,q1,q2 ; p2,q1,q2 ; domain=R9:1 ; boat=r12|- ; anchor=-|- ; sboat=[] ; sanchor=[] ; chiS=0 ; 1\n")
    code, _, err = call("assemble", data_dir / "hopf_bordered.diagram", bad)
    assert code == 2
    assert f"{bad}:2:" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["splicings", "r1.r2|r3.r12", "--interleavings"],
        ["algebra", "table", "--all"],
        ["splay", "{data}/hopf_basic.diagram", "--rows", "ml,lm,ll"],
        ["--report", "machine", "domains", "{data}/hopf_bordered.diagram"],
    ],
)
def test_output_is_byte_identical(data_dir, argv):
    argv = [a.format(data=data_dir) for a in argv]
    first, second = call(*argv), call(*argv)
    assert first == second and first[0] == 0


def test_module_entry_point():
    a = subprocess.run([sys.executable, "-m", "polysplay", "algebra", "mul", "r1", "r23"], capture_output=True)
    b = subprocess.run([sys.executable, "-m", "polysplay", "algebra", "mul", "r1", "r23"], capture_output=True)
    assert a.returncode == 0 and a.stdout == b.stdout == b"r123\n"
