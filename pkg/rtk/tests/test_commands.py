import json

import pytest

from rtk.management.commands.rtk import run_command


def report_of(output):
    lines, body, rest = output.split("---\n")
    assert rest == ""
    return json.loads(body)


@pytest.fixture
def rtk(theory_path):
    def run(verb, theory, *args):
        argv = [verb] + ([theory_path(theory)] if theory else []) + list(args)
        return run_command(argv)

    return run


@pytest.mark.parametrize("theory", ["animals", "twobit", "convex"])
def test_check_accepts_shipped_theories(rtk, theory):
    code, output = rtk("check", theory)
    assert code == 0
    report = report_of(output)
    assert report["verb"] == "check"
    assert report["verdict"] is True


def test_check_reports_a_cap_overflow(rtk):
    code, _ = rtk("check", "four")
    assert code == 3


def test_reach(rtk):
    code, output = rtk("reach", "animals", "--monoid", "T", "--from", "lynx", "--to", "puma", "--oracle")
    assert code == 0
    report = report_of(output)
    assert report["reachable"] is True
    assert report["oracle"] is True
    code, output = rtk("reach", "animals", "--monoid", "T", "--from", "cheetah", "--to", "lynx")
    assert code == 1
    assert "{cheetah} does not reach {lynx}" in output


def test_free(rtk):
    code, output = rtk("free", "four", "--monoid", "C", "--spec", "c", "--oracle")
    assert code == 0
    assert report_of(output)["resource_independent"] == [{"map": "const_c", "image": "{c}"}]
    code, _ = rtk("free", "animals", "--monoid", "F", "--spec", "lynx puma")
    assert code == 1


def test_quotient_writes_dot(rtk, tmp_path):
    target = tmp_path / "classes.dot"
    code, output = rtk(
        "quotient", "four", "--monoid", "S", "--spec", "a", "--spec", "b", "--spec", "c", "--oracle", "--dot", str(target)
    )
    assert code == 0
    report = report_of(output)
    assert report["classes"] == [["{a}", "{b}"], ["{c}"], ["{a b c d}"]]
    assert report["dot"] == str(target)
    assert target.read_text().count("[label=") == 3


def test_usage_errors_are_input_errors(rtk):
    assert rtk("quotient", "four", "--monoid", "S")[0] == 2
    assert rtk("reach", "animals", "--monoid", "T", "--from", "lynx")[0] == 2


def test_conserved(rtk):
    assert rtk("conserved", "four", "--monoid", "S", "--spec", "a b")[0] == 0
    assert rtk("conserved", "four", "--monoid", "T", "--spec", "a b")[0] == 1


def test_combine(rtk):
    code, output = rtk("combine", "twobit", "--monoid", "A", "--with", "Perm")
    assert code == 0
    assert report_of(output)["theory"] == "A&Perm"
    assert len(report_of(output)["elements"]) == 2


def test_lumping(rtk):
    code, output = rtk("lumping", "four", "--lumping", "blur", "--spec", "b")
    assert code == 0
    report = report_of(output)
    assert report["reduced"] == ["ab", "c", "d"]
    assert report["lumped"] == "{a b}"
    assert report["local"] is False
    assert report["insertion"]["passed"] is True


def test_embedding_kinds(rtk):
    kinds = {}
    for name in ("sharp", "coarse", "partial"):
        code, output = rtk("embed", "four", "--map", name)
        assert code == 0
        kinds[name] = report_of(output)["kind"]
    assert kinds == {"sharp": "extensive", "coarse": "intensive", "partial": "general"}


def test_decompose(rtk):
    code, output = rtk("decompose", "four", "--map", "partial", "--int-ext")
    assert code == 0
    report = report_of(output)
    assert report["gamma"] == ["L", "R", "d"]
    assert report["kinds"] == {"extensive": "extensive", "intensive": "intensive"}


def test_nest(rtk):
    code, output = rtk("nest", "four", "--first", "to_mid", "--second", "fine")
    assert code == 0
    assert report_of(output)["e"] == "L->{a b} R->{c d}"
    code, output = rtk("nest", "four", "--first", "fine", "--second", "coarse", "--middle")
    assert code == 0
    assert report_of(output)["e"] == "L->{p q} R->r"


def test_restrict_and_effective(rtk):
    code, output = rtk("restrict", "four", "--monoid", "C", "--agent", "S", "--lumping", "blur")
    assert code == 0
    assert report_of(output)["space"] == ["ab", "c", "d"]
    code, output = rtk("effective", "four", "--monoid", "C", "--agent", "S", "--lumping", "blur", "--side", "a c d")
    assert code == 0
    assert report_of(output)["maps"] == ["ab->ab c->c d->d"]
    code, _ = rtk("effective", "four", "--monoid", "C", "--agent", "S", "--lumping", "blur", "--side", "a c")
    assert code == 2


def test_commutant_with_oracle(rtk):
    code, output = rtk("commutant", "twobit", "--monoid", "T", "--agent", "A", "--oracle")
    assert code == 0
    report = report_of(output)
    assert len(report["elements"]) == 4
    assert report["complete"] is True


def test_subsystems(rtk, tmp_path):
    target = tmp_path / "lattice.dot"
    code, output = rtk(
        "subsystems", "twobit", "--monoid", "T", "--seeds", "A", "B", "--inherit", "Flips", "--dot", str(target)
    )
    assert code == 0
    report = report_of(output)
    assert len(report["nodes"]) == 4
    assert report["laws"]["passed"] is True
    assert len(report["inherited"]) == 4
    assert target.read_text().count("->") == 4


def test_independence_and_compatibility(rtk):
    code, output = rtk("independence", "twobit", "--monoid", "T", "--a", "A", "--b", "B")
    assert code == 0
    report = report_of(output)
    assert report["space_a"] == ["00+01", "10+11"]
    assert report["certificate"]["passed"] is True
    assert rtk("compatibility", "twobit", "--first", "keep1", "--second", "keep2")[0] == 0


def test_dependent_agents(rtk):
    code, output = rtk("independence", "twobit", "--monoid", "T", "--a", "A", "--b", "A")
    assert code == 1
    assert report_of(output)["independent"] is False


SWAP = ["--monoid", "T", "--a", "A", "--b", "B", "--u", "exchange", "--u-inv", "exchange", "--iso", "flip1=flip2", "zero1=zero2", "one1=one2"]


def test_swap_and_copies(rtk):
    code, output = rtk("swap", "twobit", *SWAP)
    assert code == 0
    assert report_of(output)["swap"]["details"]["pairs"] == 16
    code, output = rtk("copies", "twobit", *SWAP, "--spec", "00 01", "--count", "2")
    assert code == 0
    assert report_of(output)["copies"] == "{00}"
    code, output = rtk("copies", "twobit", *SWAP, "--spec", "00 01", "--count", "0")
    assert report_of(output)["copies"] == "{00 01 10 11}"
    assert rtk("copies", "twobit", *SWAP, "--spec", "00 01", "--count", "-1")[0] == 2


def test_copies_are_limited_by_the_declared_swap(rtk):
    code, output = rtk("copies", "twobit", *SWAP, "--spec", "00 01", "--count", "1")
    assert code == 0
    assert report_of(output)["copies"] == "{00 01}"
    assert rtk("copies", "twobit", *SWAP, "--spec", "00 01", "--count", "3")[0] == 2
    assert rtk("copies", "twobit", *SWAP, "--spec", "00 01", "--count", "5")[0] == 2


def test_iso_tokens_need_equals(rtk):
    args = SWAP[: SWAP.index("--iso") + 1] + ["flip1"]
    assert rtk("swap", "twobit", *args)[0] == 2


def test_approximations(rtk):
    code, output = rtk("approx-verify", "twobit", "--approx", "hamming")
    assert code == 0
    assert report_of(output)["triangle"]["passed"] is True
    assert rtk("approx-robust", "twobit", "--monoid", "Id", "--approx", "hamming", "--spec", "00", "--eps", "1")[0] == 0
    assert rtk("approx-robust", "twobit", "--monoid", "Leaky", "--approx", "hamming", "--spec", "00", "--eps", "1")[0] == 1
    code, output = rtk("approx-reduce", "twobit", "--approx", "hamming", "--lumping", "keep1")
    assert code == 0
    assert report_of(output)["collapsed"] == [["1", "2"]]


def test_convexity_verbs(rtk):
    assert rtk("hull", "convex", "--points", "triangle", "--point", "1/4 1/4", "--oracle")[0] == 0
    assert rtk("hull", "convex", "--points", "triangle", "--point", "1 1", "--oracle")[0] == 1
    code, output = rtk("extreme", "convex", "--points", "segment")
    assert report_of(output)["extreme"] == "{(0), (1)}"
    assert rtk("prob-equiv", "convex", "--points", "segment", "--other", "ends")[0] == 0
    code, output = rtk("convexity", "convex", "--affine", "shrink", "mirror", "collapse", "--points", "corners")
    assert code == 0
    assert report_of(output)["checks"]["doubly convex"]["passed"] is True


@pytest.mark.parametrize(
    "argv",
    [
        ["reach", "animals", "--monoid", "T", "--from", "zebra", "--to", "lynx"],
        ["reach", "animals", "--monoid", "Nope", "--from", "lynx", "--to", "lynx"],
        ["hull", "convex", "--points", "triangle", "--point", "1/4"],
        ["hull", "convex", "--points", "nowhere", "--point", "0 0"],
        ["hull", "convex", "--points", "triangle", "--point", "1/0 0"],
        ["convexity", "convex", "--affine", "shrink", "--points", "corners", "--p", "1/0"],
        ["copies", "twobit", *SWAP, "--spec", "00", "--count", "2"],
    ],
)
def test_input_errors(rtk, argv):
    assert rtk(*argv)[0] == 2


def test_missing_files(tmp_path):
    assert run_command(["check", str(tmp_path / "missing.rt")])[0] == 2


def test_malformed_files(tmp_path):
    bad = tmp_path / "bad.rt"
    bad.write_text("[states] a b\n[map f] a->{} b->b\n")
    assert run_command(["check", str(bad)])[0] == 2


def test_seed_is_reported_and_output_is_stable(rtk):
    first = rtk("approx-verify", "twobit", "--approx", "hamming", "--seed", "7")
    second = rtk("approx-verify", "twobit", "--approx", "hamming", "--seed", "7")
    assert first == second
    assert report_of(first[1])["seed"] == 7
    assert report_of(rtk("approx-verify", "twobit", "--approx", "hamming")[1])["seed"] == 0


def test_laws_command():
    code, output = run_command(["laws", "--scale", "100", "--seed", "3"])
    assert code == 0
    report = report_of(output)
    assert report["scale"] == 100
    assert all(suite["passed"] for suite in report["suites"])
