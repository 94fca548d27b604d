#!/usr/bin/env python3
"""
Point d'entrée principal de popcap

Chaque sous-commande renvoie un ``CommandResult`` ; ``main`` imprime son
document JSON sur stdout et sort avec le code associé au statut.
Les messages destinés aux humains partent sur stderr.
"""

import logging
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import click
from rich.console import Console

from . import __version__
from .capopt import (
    OptimizationResult,
    min_max_pareto_perfect,
    min_max_pop_perfect_exact,
    min_sum_pareto_perfect,
    min_sum_pop_perfect_exact,
    min_sum_pop_perfect_increase,
)
from .chapop import exists_perfect_popular, find_popular_cha, is_popular_cha
from .config import Config
from .errors import ContractViolation, PopcapError, UnsupportedRegime
from .generators import planted_3dm
from .model import (
    Instance,
    Matching,
    PopularityNotion,
    dump_canonical,
    enumerate_matchings,
    is_perfect,
    parse_instance,
    parse_matching,
    validate_matching,
)
from .pareto import find_pareto_max
from .popverify import find_popular_matching, verify_popular_poly
from .reductions import (
    Construction,
    MinMaxVariant,
    ThreeDMInstance,
    oracle_exact_cover,
    oracle_set_cover,
    parse_3dm,
    parse_set_cover,
    reduce_3dm_to_min_max,
    reduce_3dm_to_min_sum_dec,
    reduce_3dm_to_pmcap_lex,
    reduce_3dm_to_pmcap_traditional,
    reduce_set_cover_to_min_max,
    validate_reduction,
)
from .utils import setup_logging
from .votes import PopularityOracle, is_pareto_optimal_brute_force, is_popular_brute_force
from .votes import is_popular_lex_search

console = Console(stderr=True)
logger = logging.getLogger("popcap.main")

STATUS_EXIT_CODES = {"ok": 0, "infeasible": 2, "unsupported": 3, "too-large": 4, "error": 1}


@dataclass(frozen=True)
class CommandResult:
    status: str
    payload: Optional[dict]

    @property
    def exit_code(self) -> int:
        return STATUS_EXIT_CODES[self.status]


@dataclass
class RunSettings:
    """Paramètres d'exécution : configuration, puis options de la ligne de commande"""

    config: Config
    limit: int
    workers: int
    seed: int
    search_space: int
    option_search: int
    pairing_threshold: int

    @classmethod
    def from_config(cls, config: Config) -> "RunSettings":
        return cls(
            config=config,
            limit=config.get("limits.enumeration"),
            workers=config.get("workers"),
            seed=config.get("seed"),
            search_space=config.get("limits.search_space"),
            option_search=config.get("limits.option_search"),
            pairing_threshold=config.get("votes.pairing_threshold"),
        )


# --------------------------------------------------------------------------
# Options partagées et lecture des fichiers
# --------------------------------------------------------------------------


def _override(name: str) -> Callable:
    def callback(ctx: click.Context, _param: click.Parameter, value: Any) -> Any:
        if value is None:
            return value
        settings = ctx.find_object(RunSettings)
        if settings is None:
            # options du groupe : lues avant la création des paramètres
            ctx.meta.setdefault("popcap.overrides", {})[name] = value
        else:
            setattr(settings, name, value)
        return value

    return callback


def runtime_options(func: Callable) -> Callable:
    """--limit, --workers, --seed, acceptées aussi après la sous-commande"""
    options = [
        click.option(
            "--limit",
            type=click.IntRange(min=1),
            expose_value=False,
            callback=_override("limit"),
            help="Plafond d'énumération des oracles par force brute",
        ),
        click.option(
            "--workers",
            type=click.IntRange(min=1),
            expose_value=False,
            callback=_override("workers"),
            help="Nombre de threads de l'oracle de popularité",
        ),
        click.option(
            "--seed",
            type=int,
            expose_value=False,
            callback=_override("seed"),
            help="Graine de toute génération aléatoire",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


INPUT_FILE = click.Path(exists=True, dir_okay=False, path_type=Path)

instance_option = click.option(
    "--instance", "instance_path", type=INPUT_FILE, required=True, help="Fichier d'instance JSON"
)
matching_option = click.option(
    "--matching", "matching_path", type=INPUT_FILE, required=True, help="Fichier de couplage JSON"
)


def _read_instance(path: Path) -> Instance:
    return parse_instance(path.read_text(encoding="utf-8"))


def _edges(instance: Instance, matching: Matching) -> list:
    """Revalide le couplage avant toute sortie"""
    validate_matching(instance, matching)
    return matching.to_document(instance)["edges"]


def _optimization_payload(instance: Instance, result: OptimizationResult) -> dict:
    changed = instance.apply_change(result.change)
    validate_matching(changed, result.matching)
    if not is_perfect(changed, result.matching):
        raise ContractViolation("optimised matching is not perfect")
    return result.to_document(instance)


# --------------------------------------------------------------------------
# Groupe principal
# --------------------------------------------------------------------------


@click.group()
@click.option(
    "--config",
    "-c",
    type=click.Path(exists=True, path_type=Path),
    help="Chemin vers un fichier de configuration personnalisé",
)
@click.option("--debug", is_flag=True, help="Active le mode debug avec logs détaillés")
@runtime_options
@click.version_option(version=__version__, prog_name="popcap")
@click.pass_context
def cli(ctx: click.Context, config: Optional[Path] = None, debug: bool = False) -> None:
    """
    popcap - couplages populaires, Pareto-optimaux et parfaits dans les
    marchés plusieurs-à-un, optimisation des capacités et réductions
    """
    config_obj = Config(config_path=config)
    if debug:
        config_obj.set("app.debug", True)
    setup_logging(debug=config_obj.get("app.debug", False), level=config_obj.get("logging.level"))
    if not config_obj.validate():
        raise click.UsageError("invalid configuration")

    settings = RunSettings.from_config(config_obj)
    for name, value in ctx.meta.get("popcap.overrides", {}).items():
        setattr(settings, name, value)
    ctx.obj = settings


# --------------------------------------------------------------------------
# Vérification
# --------------------------------------------------------------------------


NOTION = click.Choice([n.value for n in PopularityNotion])
notion_option = click.option(
    "--notion", type=NOTION, default=PopularityNotion.TRADITIONAL.value, show_default=True
)


@cli.command("verify-popular")
@instance_option
@matching_option
@notion_option
@click.option("--force-bruteforce", is_flag=True, help="Oracle par énumération complète")
@click.option(
    "--paper-literal-mod",
    "literal_mod",
    is_flag=True,
    help="Diagnostic : score littéral des chemins (peut se tromper)",
)
@runtime_options
@click.pass_obj
def verify_popular(
    settings: RunSettings,
    instance_path: Path,
    matching_path: Path,
    notion: str,
    force_bruteforce: bool,
    literal_mod: bool,
) -> CommandResult:
    """Le couplage est-il populaire ?"""
    instance = _read_instance(instance_path)
    matching = parse_matching(matching_path.read_text(encoding="utf-8"), instance)
    notion = PopularityNotion(notion)
    traditional = notion is PopularityNotion.TRADITIONAL

    if literal_mod and not (traditional and instance.houses_unit):
        raise UnsupportedRegime("--paper-literal-mod needs traditional votes and unit houses")

    witness: Optional[Matching] = None
    payload: dict = {}
    if force_bruteforce:
        method = "bruteforce"
        popular, witness = is_popular_brute_force(
            instance, matching, notion, settings.limit, settings.pairing_threshold, settings.workers
        )
    elif traditional and instance.houses_unit:
        method = "popverify"
        popular, found = verify_popular_poly(instance, matching, literal_mod=literal_mod)
        if found is not None:
            witness = found.induced_matching
            if not found.dominates:
                payload["dominates"] = False
    elif instance.applicants_unit:
        method = "chapop"
        popular, failed = is_popular_cha(instance, matching)
        if failed is not None:
            payload["failedCondition"] = failed
    elif not traditional:
        method = "lex-search"
        popular, witness = is_popular_lex_search(instance, matching, settings.option_search)
    else:
        method = "bruteforce"
        popular, witness = is_popular_brute_force(
            instance, matching, notion, settings.limit, settings.pairing_threshold, settings.workers
        )
    logger.info("verify-popular : méthode %s", method)

    result = {"popular": popular}
    if witness is not None:
        result["witness"] = _edges(instance, witness)
    result.update(payload)
    return CommandResult("ok", result)


@cli.command("verify-pareto")
@instance_option
@matching_option
@runtime_options
@click.pass_obj
def verify_pareto(settings: RunSettings, instance_path: Path, matching_path: Path) -> CommandResult:
    """Le couplage est-il Pareto-optimal ? (demandeurs de capacité 1)"""
    instance = _read_instance(instance_path)
    matching = parse_matching(matching_path.read_text(encoding="utf-8"), instance)
    optimal, witness = is_pareto_optimal_brute_force(instance, matching, settings.limit)
    result = {"paretoOptimal": optimal}
    if witness is not None:
        result["witness"] = _edges(instance, witness)
    return CommandResult("ok", result)


# --------------------------------------------------------------------------
# Construction
# --------------------------------------------------------------------------


@cli.command("find-popular")
@instance_option
@notion_option
@runtime_options
@click.pass_obj
def find_popular(settings: RunSettings, instance_path: Path, notion: str) -> CommandResult:
    """Un couplage populaire, s'il en existe"""
    instance = _read_instance(instance_path)
    notion = PopularityNotion(notion)

    if instance.applicants_unit:
        matching = find_popular_cha(instance)
    elif notion is PopularityNotion.TRADITIONAL and instance.houses_unit:
        matching = find_popular_matching(instance, settings.limit)
    else:
        oracle = PopularityOracle(
            instance, notion, settings.limit, settings.pairing_threshold, settings.workers
        )
        popular = oracle.popular_indices()
        matching = oracle.matching_at(popular[0]) if popular else None

    if matching is None:
        return CommandResult("infeasible", {"matching": None})
    return CommandResult("ok", {"matching": _edges(instance, matching)})


@cli.command("exists-perfect-popular")
@instance_option
@runtime_options
def exists_perfect_popular_command(instance_path: Path) -> CommandResult:
    """Existe-t-il un couplage populaire parfait ? (demandeurs de capacité 1)"""
    instance = _read_instance(instance_path)
    exists, matching = exists_perfect_popular(instance)
    edges = _edges(instance, matching) if matching is not None else None
    return CommandResult("ok", {"exists": exists, "matching": edges})


@cli.command("find-pareto")
@instance_option
@runtime_options
def find_pareto(instance_path: Path) -> CommandResult:
    """Couplage Pareto-optimal de taille maximum"""
    instance = _read_instance(instance_path)
    return CommandResult("ok", {"matching": _edges(instance, find_pareto_max(instance))})


# --------------------------------------------------------------------------
# Optimisation des capacités
# --------------------------------------------------------------------------


def _optimum(instance: Instance, result: Optional[OptimizationResult]) -> CommandResult:
    if result is None:
        return CommandResult(
            "infeasible", {"change": None, "matching": None, "cost": None, "certificate": None}
        )
    return CommandResult("ok", _optimization_payload(instance, result))


@cli.command("minsum-pop-perfect")
@instance_option
@click.option("--exact", is_flag=True, help="Recherche exhaustive plutôt que polynomiale")
@click.option("--allow-decrease", is_flag=True, help="Autorise les diminutions (implique --exact)")
@click.option("--budget", type=click.IntRange(min=0), help="Coût maximum exploré (défaut |A|)")
@runtime_options
@click.pass_obj
def minsum_pop_perfect(
    settings: RunSettings,
    instance_path: Path,
    exact: bool,
    allow_decrease: bool,
    budget: Optional[int],
) -> CommandResult:
    """Changement |r|_1 minimum pour un couplage populaire parfait"""
    instance = _read_instance(instance_path)
    if exact or allow_decrease:
        result = min_sum_pop_perfect_exact(instance, budget, allow_decrease, settings.search_space)
    else:
        result = min_sum_pop_perfect_increase(instance)
    return _optimum(instance, result)


@cli.command("minmax-pop-perfect")
@instance_option
@click.option("--allow-decrease", is_flag=True, help="Autorise les diminutions")
@click.option("--kbound", type=click.IntRange(min=0), help="k maximum exploré (défaut |A|)")
@runtime_options
@click.pass_obj
def minmax_pop_perfect(
    settings: RunSettings, instance_path: Path, allow_decrease: bool, kbound: Optional[int]
) -> CommandResult:
    """Changement |r|_inf minimum pour un couplage populaire parfait"""
    instance = _read_instance(instance_path)
    result = min_max_pop_perfect_exact(instance, kbound, allow_decrease, settings.search_space)
    return _optimum(instance, result)


@cli.command("minsum-pareto-perfect")
@instance_option
@runtime_options
def minsum_pareto_perfect(instance_path: Path) -> CommandResult:
    """Changement |r|_1 minimum pour un couplage Pareto-optimal parfait"""
    instance = _read_instance(instance_path)
    return _optimum(instance, min_sum_pareto_perfect(instance))


@cli.command("minmax-pareto-perfect")
@instance_option
@runtime_options
def minmax_pareto_perfect(instance_path: Path) -> CommandResult:
    """Changement |r|_inf minimum pour un couplage Pareto-optimal parfait"""
    instance = _read_instance(instance_path)
    return _optimum(instance, min_max_pareto_perfect(instance))


# --------------------------------------------------------------------------
# Réductions et oracles
# --------------------------------------------------------------------------


def _construct(source: Any, construction: Construction, n_scale: Optional[int]) -> dict:
    """Instance construite et paramètre cible éventuel"""
    if construction is Construction.SETCOVER_MINMAX:
        return {"instance": reduce_set_cover_to_min_max(source, n_scale)}
    if construction is Construction.PMCAP_TRADITIONAL:
        return {"instance": reduce_3dm_to_pmcap_traditional(source)}
    if construction is Construction.PMCAP_LEX:
        return {"instance": reduce_3dm_to_pmcap_lex(source)}
    if construction is Construction.MINSUM_DECREASE:
        instance, budget = reduce_3dm_to_min_sum_dec(source)
        return {"instance": instance, "budget": budget}
    variant = (
        MinMaxVariant.INCREASE_K2
        if construction is Construction.MINMAX_INCREASE_K2
        else MinMaxVariant.DECREASE_K1
    )
    instance, k = reduce_3dm_to_min_max(source, variant)
    return {"instance": instance, "kTarget": k}


@cli.command("reduce")
@click.option(
    "--construction",
    type=click.Choice([c.value for c in Construction]),
    required=True,
    help="Construction à appliquer",
)
@click.option("--in", "source_path", type=INPUT_FILE, help="Instance source (3DM ou Set Cover)")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--validate", is_flag=True, help="Joint le rapport de validation de la réduction")
@click.option("--nscale", type=click.IntRange(min=1), help="N de la construction Set Cover")
@click.option("--random", "random_n", type=click.IntRange(min=1), help="3DM strict aléatoire")
@runtime_options
@click.pass_obj
def reduce_command(
    settings: RunSettings,
    construction: str,
    source_path: Optional[Path],
    out_path: Optional[Path],
    validate: bool,
    nscale: Optional[int],
    random_n: Optional[int],
) -> CommandResult:
    """Génère l'instance cible d'une réduction de NP-difficulté"""
    construction = Construction(construction)
    if (source_path is None) == (random_n is None):
        raise click.UsageError("exactly one of --in and --random is required")

    if random_n is not None:
        if construction is Construction.SETCOVER_MINMAX:
            raise click.UsageError("--random generates 3DM sources only")
        source, _ = planted_3dm(random.Random(settings.seed), random_n)
    elif construction is Construction.SETCOVER_MINMAX:
        source = parse_set_cover(source_path.read_text(encoding="utf-8"))
    else:
        source = parse_3dm(source_path.read_text(encoding="utf-8"))

    built = _construct(source, construction, nscale)
    instance: Instance = built.pop("instance")
    if any(instance.house_capacity[h] == 0 for h in instance.houses):
        logger.warning("Maison de capacité 0 : instance non relisible par parse_instance")

    payload: dict = {"construction": construction.value}
    if random_n is not None:
        payload["source"] = source.to_document()
    if out_path is not None:
        out_path.write_text(instance.serialize(), encoding="utf-8")
        payload["out"] = str(out_path)
    else:
        payload["instance"] = instance.to_document()
    payload.update(built)

    if validate:
        report = validate_reduction(
            source,
            construction,
            settings.limit,
            settings.search_space,
            settings.option_search,
            nscale,
        )
        payload["report"] = report.to_document()
    return CommandResult("ok", payload)


@cli.command("oracle-3dm")
@click.option("--in", "source_path", type=INPUT_FILE, required=True)
@runtime_options
def oracle_3dm(source_path: Path) -> CommandResult:
    """Couverture exacte par force brute"""
    source: ThreeDMInstance = parse_3dm(source_path.read_text(encoding="utf-8"))
    cover = oracle_exact_cover(source)
    return CommandResult("ok", {"cover": list(cover) if cover is not None else None})


@cli.command("oracle-setcover")
@click.option("--in", "source_path", type=INPUT_FILE, required=True)
@runtime_options
def oracle_setcover(source_path: Path) -> CommandResult:
    """Couverture minimum par force brute"""
    source = parse_set_cover(source_path.read_text(encoding="utf-8"))
    optimum, cover = oracle_set_cover(source)
    return CommandResult("ok", {"optCost": optimum, "cover": list(cover)})


@cli.command("enumerate")
@instance_option
@runtime_options
@click.pass_obj
def enumerate_command(settings: RunSettings, instance_path: Path) -> CommandResult:
    """Tous les couplages faisables, dans l'ordre canonique"""
    instance = _read_instance(instance_path)
    matchings = [_edges(instance, m) for m in enumerate_matchings(instance, settings.limit)]
    return CommandResult("ok", {"count": len(matchings), "matchings": matchings})


# --------------------------------------------------------------------------
# Exécution
# --------------------------------------------------------------------------


def run_command(argv: Sequence[str]) -> CommandResult:
    """Exécute une ligne de commande et traduit les exceptions en statut"""
    try:
        rv = cli.main(args=list(argv), prog_name="popcap", standalone_mode=False)
    except click.exceptions.Abort:
        return CommandResult("error", {"error": "interrupted"})
    except click.ClickException as e:
        return CommandResult("error", {"error": e.format_message()})
    except PopcapError as e:
        logger.debug("Commande en échec", exc_info=True)
        return CommandResult(e.status, {"error": str(e)})
    except OSError as e:
        return CommandResult("error", {"error": str(e)})

    if isinstance(rv, CommandResult):
        return rv
    # --help et --version : click a déjà écrit sur stdout
    return CommandResult("ok", None)


def main(argv: Optional[Sequence[str]] = None) -> None:
    try:
        result = run_command(sys.argv[1:] if argv is None else argv)
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrompu par l'utilisateur[/yellow]")
        sys.exit(STATUS_EXIT_CODES["error"])
    except Exception as e:
        console.print(f"\n[red]Erreur fatale:[/red] {e}", style="bold red")
        if logging.getLogger().isEnabledFor(logging.DEBUG):
            console.print_exception()
        sys.exit(STATUS_EXIT_CODES["error"])

    if result.payload is not None:
        click.echo(dump_canonical(result.payload))
    if result.status != "ok" and result.payload and "error" in result.payload:
        console.print(f"[red]{result.status}:[/red] {result.payload['error']}")
    sys.exit(result.exit_code)


if __name__ == "__main__":
    main()
