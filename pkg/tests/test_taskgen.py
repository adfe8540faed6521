import ast
import re

import pytest

from codebench import pysyntax, subword
from codebench.pysyntax import FunctionUnit
from codebench.taskgen import generators as g
from codebench.taskgen import pointer, tables
from codebench.taskgen.pointer import PointerExample

SEEDS = [str(i) for i in range(40)]


def unit(src, path="m.py"):
    units = pysyntax.split_functions(src, path)
    assert len(units) == 1
    return units[0], pysyntax.analyze(units[0])


ON_RESIZE = "def on_resize(self, event):\n  event.apply_zoom()\n"


# -- variable misuse

def test_misuse_needs_two_variables():
    f, ft = unit("def f(a):\n    return a\n")
    assert g.gen_variable_misuse(f, ft, "0") is None


def test_misuse_caps_defined_variables():
    names = [f"v{i}" for i in range(51)]
    f, ft = unit(f"def f({', '.join(names)}):\n    return v0\n")
    assert len(ft.defined_vars) == 51
    assert g.gen_variable_misuse(f, ft, "0") is None
    f, ft = unit(f"def f({', '.join(names[:50])}):\n    return v0\n")
    assert g.gen_variable_misuse(f, ft, "0") is not None


def test_misuse_needs_a_use():
    f, ft = unit("def f(a, b):\n    pass\n")
    assert g.gen_variable_misuse(f, ft, "0") is None


def test_misuse_on_resize():
    f, ft = unit(ON_RESIZE)
    for seed in SEEDS[:5]:
        pair = g.gen_variable_misuse(f, ft, seed)
        assert pair.bugfree.code == ON_RESIZE
        assert pair.buggy.code == "def on_resize(self, event):\n  self.apply_zoom()\n"
        assert (pair.bug.original, pair.bug.replacement) == ("event", "self")
        assert pair.buggy.label == "Variable misuse" and pair.bugfree.label == "Correct"
        assert pysyntax.parses(pair.buggy.code)
        assert pair.buggy.info == "m.py#on_resize@1/buggy"


def test_misuse_is_deterministic_and_seed_dependent():
    src = "def f(a, b, c, d):\n    x = a + b\n    y = c * d\n    return x - y + a * b\n"
    f, ft = unit(src)
    outs = {g.gen_variable_misuse(f, ft, s).buggy.code for s in SEEDS}
    assert len(outs) > 3
    assert g.gen_variable_misuse(f, ft, "7") == g.gen_variable_misuse(*unit(src), "7")


# -- wrong binary operator

def binop_outputs(src):
    f, ft = unit(src)
    return [g.gen_wrong_binop(f, ft, s).buggy.code for s in SEEDS]


def test_plus_replaced_within_arithmetic_row():
    seen = set()
    for code in binop_outputs("def f(a, b):\n    return a + b\n"):
        m = re.fullmatch(r"def f\(a, b\):\n    return a (\S+) b\n", code)
        seen.add(m.group(1))
    assert seen == {"*", "-", "/", "%"}


def test_equality_never_becomes_membership():
    seen = set()
    for code in binop_outputs("def f(a, b):\n    return a == b\n"):
        op = code.split("return a ", 1)[1].rsplit(" b", 1)[0]
        seen.add(op)
    assert seen <= {"!=", "is", "is not", "<", "<=", ">", ">="}
    assert "is" in seen


def test_keyword_operator_gets_spaces():
    src = "def f():\n    return 1==2\n"
    f, ft = unit(src)
    outs = {g.gen_wrong_binop(f, ft, s).buggy.code for s in SEEDS}
    assert "def f():\n    return 1 is 2\n" in outs
    assert "def f():\n    return 1 is not 2\n" in outs
    assert all(pysyntax.parses(c) for c in outs)


def test_no_operator_no_example():
    f, ft = unit("def f(a):\n    return a // 2\n")
    assert g.gen_wrong_binop(f, ft, "0") is None


def test_operator_table_has_no_floor_division():
    assert "//" not in tables.ROW_OF
    assert tables.ROW_OF["not in"].name == "Membership"
    assert set(tables.NON_COMMUTATIVE) == {"-", "/", "%", "<", "<=", ">", ">=", "in", "not in"}


# -- swapped operands

def test_swap_simple():
    f, ft = unit("def f(a, b):\n    return a < b\n")
    assert g.gen_swapped_operand(f, ft, "0").buggy.code == "def f(a, b):\n    return b < a\n"


def test_swap_contains_example():
    f, ft = unit("def __contains__(cls, model):\n  return cls._registry in model\n")
    assert g.gen_swapped_operand(f, ft, "0").buggy.code == \
        "def __contains__(cls, model):\n  return model in cls._registry\n"


def test_identical_operands_not_candidates():
    f, ft = unit("def f(a):\n    return a - a\n")
    assert g.gen_swapped_operand(f, ft, "0") is None


def test_multiline_operator_not_candidate():
    f, ft = unit("def f(a, b):\n    return (a -\n            b)\n")
    assert g.gen_swapped_operand(f, ft, "0") is None


def test_commutative_operator_not_candidate():
    f, ft = unit("def f(a, b):\n    return a + b\n")
    assert g.gen_swapped_operand(f, ft, "0") is None


def test_swap_keeps_structure():
    src = "def f(a, b, c):\n    return a - b * c < c - a\n"
    f, ft = unit(src)
    for s in SEEDS:
        code = g.gen_swapped_operand(f, ft, s).buggy.code
        assert sorted(ast.dump(ast.parse(code))) == sorted(ast.dump(ast.parse(src)))


def test_swap_chained_comparison():
    f, ft = unit("def f(a, b, c):\n    return a < b <= c\n")
    outs = {g.gen_swapped_operand(f, ft, s).buggy.code.split("return ")[1] for s in SEEDS}
    assert outs == {"b < a <= c\n", "a < c <= b\n"}


# -- exception type

@pytest.mark.parametrize("name,label", [
    ("ValueError", "VALUE_ERROR"), ("OSError", "OS_ERROR"), ("IOError", "IO_ERROR"),
    ("django.core.exceptions.ValidationError", "VALIDATION_ERROR"),
    ("models.ObjectDoesNotExist", "OBJECT_DOES_NOT_EXIST"),
    ("urllib2.HTTPError", "HTTP_ERROR"), ("KeyboardInterrupt", "KEYBOARD_INTERRUPT"),
    ("Exception", None), ("MyError", None),
])
def test_exception_label_mapping(name, label):
    assert tables.exception_label(name) == label


def test_twenty_labels():
    assert len(tables.EXCEPTION_LABELS) == 20 == len(set(tables.EXCEPTION_LABELS))


def test_exception_hole():
    src = "def f(s):\n    try:\n        return int(s)\n    except ValueError:\n        return 0\n"
    f, ft = unit(src)
    e = g.gen_exception_type(f, ft, "0")
    assert e.label == "VALUE_ERROR"
    assert e.code == src.replace("ValueError", "__HOLE__")
    assert e.info == "m.py#f@1/hole"


def test_catch_all_only():
    src = "def f():\n    try:\n        pass\n    except Exception:\n        pass\n    except:\n        pass\n"
    f, ft = unit(src)
    assert g.gen_exception_type(f, ft, "0") is None


def test_subprocess_example():
    src = ("def hook(hook_value):\n"
           "  try:\n"
           "    subprocess.call(hook_value)\n"
           "    return jsonify(success=True), 200\n"
           "  except OSError as e:\n"
           "    return jsonify(success=False,\n"
           "      error=str(e)), 400\n")
    f, ft = unit(src)
    e = g.gen_exception_type(f, ft, "0")
    assert e.label == "OS_ERROR"
    assert "except __HOLE__ as e:" in e.code


def test_tuple_slots_count_individually():
    src = "def f():\n    try:\n        pass\n    except (KeyError, Exception, IndexError):\n        pass\n"
    f, ft = unit(src)
    labels = {g.gen_exception_type(f, ft, s).label for s in SEEDS}
    assert labels == {"KEY_ERROR", "INDEX_ERROR"}


# -- docstrings

def doc_items(srcs):
    items = []
    for i, src in enumerate(srcs):
        f, ft = unit(src, f"d{i:03d}.py")
        it = g.docstring_item(f, ft)
        if it is not None:
            items.append(it)
    return items


def test_functions_without_docstring_excluded():
    assert doc_items(["def f():\n    return 1\n", 'def f():\n    ""\n    return 1\n']) == []


def test_docstring_pairs():
    srcs = [f'def f{i}():\n    """Summary {i}.\n\n    Details."""\n    return {i}\n' for i in range(50)]
    items = doc_items(srcs)
    pairs = g.gen_function_docstring(items, "0", "train")
    assert len(pairs) == 50 - g.fixed_points(50, "0", "train")
    for p in pairs:
        assert p.bugfree.code == p.buggy.code
        assert '"""' not in p.bugfree.code
        assert p.bugfree.docstring == f"Summary {p.unit.qualname[1:]}."
        assert p.buggy.docstring != p.bugfree.docstring
        assert p.buggy.label == "Incorrect docstring"
    assert g.gen_function_docstring(list(reversed(items)), "0", "train") == pairs


def test_docstring_fixed_points_dropped():
    items = doc_items([f'def f{i}():\n    """S{i}."""\n    return {i}\n' for i in range(200)])
    for seed in SEEDS:
        fp = g.fixed_points(len(items), seed, "train")
        if fp:
            pairs = g.gen_function_docstring(items, seed, "train")
            assert len(pairs) == len(items) - fp
            return
    pytest.fail("no seed with a fixed point among the tried seeds")


def test_docstring_mismatch_example():
    items = doc_items(['def __add__(self, cov):\n    """Sum of kernels."""\n    return SumOfKernel(self, cov)\n',
                       'def initial(self):\n    """Get form initial data."""\n    return self.data\n'])
    seed = next(s for s in SEEDS if g.fixed_points(2, s, "test") == 0)
    pairs = g.gen_function_docstring(items, seed, "test")
    assert len(pairs) == 2
    add = next(p for p in pairs if p.unit.qualname == "__add__")
    assert add.buggy.docstring == "Get form initial data."
    assert add.buggy.code == "def __add__(self, cov):\n    return SumOfKernel(self, cov)\n"


# -- pointer examples

def char_vocab(extra=()):
    letters = sorted(set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_()=:,.+-*'\" "))
    return subword.SubwordVocabulary(subword.RESERVED + tuple(extra) + tuple(letters))


def pointer_pair(src, vocab, seed="0"):
    f, ft = unit(src)
    pair = g.gen_variable_misuse(f, ft, seed)
    return pair, pointer.gen_pointer_example(pair, vocab)


def test_pointer_on_resize():
    vocab = char_vocab(("self", "event", "apply", "zoom", "def", "on", "resize"))
    pair, (buggy, bugfree) = pointer_pair(ON_RESIZE, vocab)
    assert bugfree.subtokens[0] == "[CLS]" and bugfree.candidates_mask[0]
    assert bugfree.error_location_mask[0] and sum(bugfree.error_location_mask) == 1
    assert not any(bugfree.targets_mask)
    assert not buggy.error_location_mask[0] and sum(buggy.error_location_mask) == 1
    err = buggy.error_location_mask.index(True)
    assert buggy.subtokens[err] == "self"
    targets = [buggy.subtokens[k] for k, t in enumerate(buggy.targets_mask) if t]
    assert targets == ["event"]
    cands = [buggy.subtokens[k] for k, c in enumerate(buggy.candidates_mask) if c]
    assert cands == ["[CLS]", "self", "event", "self"]
    assert pointer.mask_violations(buggy) == [] == pointer.mask_violations(bugfree)


def test_pointer_marks_only_first_subtoken():
    src = "def f(abc, d):\n    return abc + d\n"
    vocab = char_vocab(("def", "return"))
    for seed in SEEDS:
        _, (buggy, bugfree) = pointer_pair(src, vocab, seed)
        for e in (buggy, bugfree):
            assert pointer.mask_violations(e) == []
            for k in range(len(e)):
                if e.subtokens[k] == "a" and e.subtokens[k + 1:k + 3] == ("b", "c"):
                    assert e.candidates_mask[k]
                    assert not e.candidates_mask[k + 1] and not e.candidates_mask[k + 2]


def test_pointer_requires_misuse_pair():
    f, ft = unit("def f(a, b):\n    return a < b\n")
    with pytest.raises(pointer.PointerError):
        pointer.gen_pointer_example(g.gen_swapped_operand(f, ft, "0"), char_vocab())


def make_example(n, err_at, targets):
    cand = [False] * n
    targ = [False] * n
    err = [False] * n
    cand[0] = True
    for k in targets:
        cand[k] = targ[k] = True
    cand[err_at] = err[err_at] = True
    return PointerExample(tuple("x" for _ in range(n)), (True,) * n, tuple(cand), tuple(targ),
                          tuple(err), "p")


def test_prune_short_is_identity():
    e = make_example(10, 3, [5])
    assert pointer.prune_example(e, 512) is e
    assert pointer.prune_example(e, 10) is e


def test_prune_far_error_flagged_and_kept():
    e = make_example(2500, 2000, [5])
    p = pointer.prune_example(e, 512)
    assert len(p) == 512 and p.truncated and p.buggy
    assert pointer.mask_violations(p) == []
    near = pointer.prune_example(make_example(2500, 100, [5, 2100]), 512)
    assert not near.truncated
    lost_targets = pointer.prune_example(make_example(2500, 100, [2100]), 512)
    assert lost_targets.truncated


def test_prune_bugfree_never_flagged():
    e = make_example(600, 0, [])
    assert not pointer.prune_example(e, 128).truncated


def test_mask_violations_detected():
    good = make_example(6, 2, [4])
    assert pointer.mask_violations(good) == []
    bad = PointerExample(good.subtokens, good.token_starts, (False,) + good.candidates_mask[1:],
                         good.targets_mask, good.error_location_mask, "p")
    assert "position 0 is not a candidate" in pointer.mask_violations(bad)
    none = make_example(6, 2, [])
    assert "buggy example without targets" in pointer.mask_violations(none)
    layout = PointerExample(good.subtokens[:2] + ("___NL___",) + good.subtokens[3:],
                            good.token_starts, good.candidates_mask, good.targets_mask,
                            good.error_location_mask, "p")
    assert pointer.mask_violations(layout)


def test_pointer_dict_roundtrip():
    e = make_example(8, 3, [5])
    assert PointerExample.from_dict(e.to_dict()) == e


def test_mutants_splice_only_the_site():
    src = "def f(a, b):\n    # keep   this   spacing\n    x  =  a+b\n    return x\n"
    f, ft = unit(src)
    pair = g.gen_wrong_binop(f, ft, "0")
    diff = [(x, y) for x, y in zip(src.splitlines(), pair.buggy.code.splitlines()) if x != y]
    assert len(diff) == 1 and "x  =  a" in diff[0][1]


def test_function_key():
    f = FunctionUnit("def f():\n    pass\n", "pkg/m.py", "C.f", 12)
    assert g.function_key(f) == "pkg/m.py#C.f@12"
