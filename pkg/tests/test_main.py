"""
Tests pour l'interface en ligne de commande
"""

import json

import pytest

from popcap.generators import worked_example
from popcap.main import STATUS_EXIT_CODES, CommandResult, main, run_command
from popcap.model import Instance, parse_instance


class TestCommandResult:
    """Tests pour la correspondance statut / code de sortie"""

    @pytest.mark.parametrize(
        "status,code",
        [("ok", 0), ("error", 1), ("infeasible", 2), ("unsupported", 3), ("too-large", 4)],
    )
    def test_exit_codes(self, status, code):
        assert CommandResult(status, None).exit_code == code
        assert STATUS_EXIT_CODES[status] == code


class TestCommands:
    """Tests des sous-commandes via run_command"""

    @pytest.fixture
    def write(self, tmp_path):
        """Écrit un document JSON ou une instance dans le répertoire temporaire"""

        def _write(name, document):
            path = tmp_path / name
            if isinstance(document, Instance):
                path.write_text(document.serialize(), encoding="utf-8")
            else:
                path.write_text(json.dumps(document), encoding="utf-8")
            return str(path)

        return _write

    @pytest.fixture
    def single(self, write):
        return write("single.json", Instance.create({"a1": ["h1"]}, {"h1": 1}))

    @pytest.fixture
    def example(self, write):
        return write("ex42.json", worked_example(2))

    def test_verify_popular(self, write, single):
        matching = write("m.json", {"edges": [["a1", "h1"]]})
        result = run_command(["verify-popular", "--instance", single, "--matching", matching])

        assert result.status == "ok"
        assert result.payload == {"popular": True}

    def test_verify_popular_witness(self, write, single):
        empty = write("m.json", {"edges": []})
        result = run_command(["verify-popular", "--instance", single, "--matching", empty])
        assert result.payload == {"popular": False, "witness": [["a1", "h1"]]}

    def test_verify_popular_bruteforce(self, write, single):
        empty = write("m.json", {"edges": []})
        result = run_command(
            [
                "verify-popular",
                "--instance",
                single,
                "--matching",
                empty,
                "--notion",
                "lex",
                "--force-bruteforce",
            ]
        )
        assert result.payload == {"popular": False, "witness": [["a1", "h1"]]}

    def test_verify_popular_characterisation(self, write):
        """Maisons capacitaires : la condition violée est rapportée"""
        instance = write(
            "i.json",
            Instance.create({"a1": ["h1", "h2"], "a2": ["h1", "h2"]}, {"h1": 1, "h2": 2}),
        )
        matching = write("m.json", {"edges": [["a2", "h1"]]})
        result = run_command(["verify-popular", "--instance", instance, "--matching", matching])

        assert result.payload == {"popular": False, "failedCondition": 2}

    def test_literal_mod_diagnostic(self, write):
        instance = write("i.json", Instance.create({"a": ["h"], "b": ["h"]}, {"h": 1}))
        matching = write("m.json", {"edges": [["a", "h"]]})
        args = ["verify-popular", "--instance", instance, "--matching", matching]

        assert run_command(args).payload == {"popular": True}
        literal = run_command(args + ["--paper-literal-mod"])
        assert literal.payload == {"popular": False, "witness": [["b", "h"]], "dominates": False}

    def test_verify_pareto(self, write):
        instance = write("i.json", Instance.create({"a": ["h1", "h2"]}, {"h1": 1, "h2": 1}))
        matching = write("m.json", {"edges": [["a", "h2"]]})
        result = run_command(["verify-pareto", "--instance", instance, "--matching", matching])

        assert result.payload == {"paretoOptimal": False, "witness": [["a", "h1"]]}

    def test_find_popular_none(self, write):
        instance = write(
            "i.json",
            Instance.create(
                {f"a{k}": ["h1", "h2", "h3"] for k in range(1, 4)}, {"h1": 1, "h2": 1, "h3": 1}
            ),
        )
        result = run_command(["find-popular", "--instance", instance])

        assert result.status == "infeasible"
        assert result.exit_code == 2
        assert result.payload == {"matching": None}

    def test_exists_perfect_popular(self, example):
        result = run_command(["exists-perfect-popular", "--instance", example])
        assert result.payload == {"exists": False, "matching": None}

    def test_exists_perfect_popular_unsupported(self, write):
        instance = write(
            "i.json", Instance.create({"a": ["h1", "h2"]}, {"h1": 1, "h2": 1}, {"a": 2})
        )
        result = run_command(["exists-perfect-popular", "--instance", instance])

        assert result.status == "unsupported"
        assert result.exit_code == 3

    def test_find_pareto(self, write):
        instance = write(
            "i.json", Instance.create({"a1": ["h1", "h2"], "a2": ["h1", "h2"]}, {"h1": 1, "h2": 1})
        )
        result = run_command(["find-pareto", "--instance", instance])
        assert result.payload == {"matching": [["a1", "h1"], ["a2", "h2"]]}

    def test_minsum_increase(self, example):
        result = run_command(["minsum-pop-perfect", "--instance", example])

        assert result.status == "ok"
        assert result.payload["cost"] == 2
        assert result.payload["certificate"] == "PolyOptimal"

    def test_minsum_with_decrease(self, example):
        result = run_command(
            [
                "minsum-pop-perfect",
                "--instance",
                example,
                "--exact",
                "--allow-decrease",
                "--budget",
                "2",
            ]
        )

        assert result.payload["cost"] == 1
        assert result.payload["change"] == {"h2": -1}
        assert result.payload["certificate"] == "ExhaustiveOptimal"

    def test_minsum_budget_exhausted(self, example):
        args = ["minsum-pop-perfect", "--instance", example, "--exact", "--budget", "1"]
        result = run_command(args)

        assert result.status == "infeasible"
        assert result.payload["cost"] is None

    def test_minmax(self, example):
        result = run_command(["minmax-pop-perfect", "--instance", example])
        assert result.payload["cost"] == 1

    def test_pareto_optimisers(self, write):
        crowded = write("i.json", Instance.create({"a1": ["h1"], "a2": ["h1"]}, {"h1": 1}))

        total = run_command(["minsum-pareto-perfect", "--instance", crowded])
        peak = run_command(["minmax-pareto-perfect", "--instance", crowded])
        assert total.payload["cost"] == peak.payload["cost"] == 1
        assert total.payload["matching"] == [["a1", "h1"], ["a2", "h1"]]

    def test_enumerate(self, single):
        result = run_command(["enumerate", "--instance", single])
        assert result.payload == {"count": 2, "matchings": [[], [["a1", "h1"]]]}

    @pytest.mark.parametrize("before", [True, False])
    def test_limit_option(self, example, before):
        """--limit accepté avant ou après la sous-commande"""
        command = ["enumerate", "--instance", example]
        args = ["--limit", "1"] + command if before else command + ["--limit", "1"]
        result = run_command(args)

        assert result.status == "too-large"
        assert result.exit_code == 4

    def test_parse_error(self, tmp_path):
        broken = tmp_path / "broken.json"
        broken.write_text("{not json", encoding="utf-8")
        result = run_command(["enumerate", "--instance", str(broken)])

        assert result.status == "error"
        assert "line 1" in result.payload["error"]

    def test_missing_file(self, tmp_path):
        result = run_command(["enumerate", "--instance", str(tmp_path / "absent.json")])
        assert result.exit_code == 1

    def test_unknown_command(self):
        assert run_command(["no-such-command"]).exit_code == 1

    def test_version(self):
        assert run_command(["--version"]) == CommandResult("ok", None)

    def test_reduce_random(self):
        args = ["reduce", "--construction", "minmax-dec1", "--random", "1", "--seed", "3"]
        result = run_command(args)

        assert result.payload["construction"] == "minmax-dec1"
        assert result.payload["kTarget"] == 1
        assert result.payload["source"]["nHat"] == 1
        assert len(result.payload["instance"]["houses"]) == 13

    def test_reduce_to_file(self, write, tmp_path):
        source = write("s.json", {"nHat": 1, "triples": [[1, 1, 1]] * 3})
        out = tmp_path / "target.json"
        result = run_command(
            ["reduce", "--construction", "pmcap-trad", "--in", source, "--out", str(out)]
        )

        assert result.payload == {"construction": "pmcap-trad", "out": str(out)}
        assert len(parse_instance(out.read_text(encoding="utf-8")).applicants) == 3

    def test_reduce_needs_one_source(self):
        result = run_command(["reduce", "--construction", "pmcap-trad"])
        assert result.status == "error"

    def test_reduce_validate(self, write):
        source = write("s.json", {"nHat": 1, "triples": [[1, 1, 1]] * 3})
        result = run_command(
            ["reduce", "--construction", "minsum-dec", "--in", source, "--validate"]
        )

        assert result.payload["budget"] == 2
        assert result.payload["report"]["agree"] is True

    def test_oracles(self, write):
        three_dm = write("t.json", {"nHat": 1, "triples": [[1, 1, 1]] * 3})
        set_cover = write("c.json", {"nElements": 3, "sets": [[1, 2], [2, 3], [3]]})

        assert run_command(["oracle-3dm", "--in", three_dm]).payload == {"cover": [0]}
        assert run_command(["oracle-setcover", "--in", set_cover]).payload == {
            "optCost": 2,
            "cover": [0, 1],
        }


class TestMain:
    """Tests pour main : sortie JSON et code de sortie"""

    def test_prints_payload(self, tmp_path, capsys):
        path = tmp_path / "i.json"
        path.write_text(Instance.create({"a1": ["h1"]}, {"h1": 1}).serialize(), encoding="utf-8")

        with pytest.raises(SystemExit) as excinfo:
            main(["enumerate", "--instance", str(path)])

        assert excinfo.value.code == 0
        out = capsys.readouterr().out
        assert json.loads(out) == {"count": 2, "matchings": [[], [["a1", "h1"]]]}

    def test_error_exit_code(self, tmp_path, capsys):
        path = tmp_path / "i.json"
        path.write_text(
            Instance.create({"a": ["h1", "h2"]}, {"h1": 1, "h2": 1}, {"a": 2}).serialize(),
            encoding="utf-8",
        )

        with pytest.raises(SystemExit) as excinfo:
            main(["find-pareto", "--instance", str(path)])

        assert excinfo.value.code == 3
        assert "error" in json.loads(capsys.readouterr().out)
