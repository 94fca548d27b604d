"""
Gestion de la configuration pour popcap
"""

import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger("popcap.config")


class Config:
    """Gestionnaire de configuration avec support YAML et variables d'environnement"""

    DEFAULT_CONFIG = {
        "app": {
            "name": "popcap",
            "version": "1.0.0",
            "debug": False,
        },
        "limits": {
            "enumeration": 1_000_000,
            "search_space": 10_000_000,
            "option_search": 5_000_000,
        },
        "votes": {
            "pairing_threshold": 6,
        },
        "workers": 1,
        "seed": 0,
        "logging": {
            "level": "WARNING",
        },
    }

    ENV_MAPPINGS = {
        "POPCAP_DEBUG": ("app.debug", "bool"),
        "POPCAP_ENUMERATION_LIMIT": ("limits.enumeration", "int"),
        "POPCAP_SEARCH_SPACE": ("limits.search_space", "int"),
        "POPCAP_OPTION_SEARCH": ("limits.option_search", "int"),
        "POPCAP_PAIRING_THRESHOLD": ("votes.pairing_threshold", "int"),
        "POPCAP_WORKERS": ("workers", "int"),
        "POPCAP_LOG_LEVEL": ("logging.level", "str"),
    }

    def __init__(self, config_path: Optional[Path] = None):
        self.config_path = config_path
        self.config = self._load_config()
        self._apply_env_overrides()

    def _load_config(self) -> Dict[str, Any]:
        """Charge la configuration depuis un fichier ou utilise les defaults"""
        config = copy.deepcopy(self.DEFAULT_CONFIG)

        config_paths = []
        if self.config_path:
            config_paths.append(Path(self.config_path))
        config_paths.extend([
            Path("config/config.yaml"),
            Path.home() / ".popcap" / "config.yaml",
            Path("/etc/popcap/config.yaml"),
        ])

        # La première configuration trouvée gagne
        for path in config_paths:
            if path.exists():
                try:
                    with open(path, "r", encoding="utf-8") as f:
                        user_config = yaml.safe_load(f) or {}
                    config = self._deep_merge(config, user_config)
                    logger.debug("Configuration chargée depuis %s", path)
                    break
                except (OSError, yaml.YAMLError) as e:
                    logger.warning("Erreur lors du chargement de %s: %s", path, e)

        return config

    def _deep_merge(self, base: Dict, update: Dict) -> Dict:
        """Fusion profonde de deux dictionnaires"""
        result = base.copy()

        for key, value in update.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value

        return result

    def _apply_env_overrides(self) -> None:
        """Applique les overrides depuis les variables d'environnement"""
        parsers = {"bool": self._parse_bool, "int": int, "str": str}

        for env_var, (config_path, kind) in self.ENV_MAPPINGS.items():
            value = os.environ.get(env_var)
            if value is None:
                continue
            try:
                self.set(config_path, parsers[kind](value))
            except ValueError:
                logger.warning("Valeur ignorée pour %s: %r", env_var, value)

    def get(self, path: str, default: Any = None) -> Any:
        """Récupère une valeur de configuration par chemin pointé"""
        value = self.config

        try:
            for key in path.split("."):
                value = value[key]
            return value
        except (KeyError, TypeError):
            return default

    def set(self, path: str, value: Any) -> None:
        """Définit une valeur de configuration"""
        keys = path.split(".")
        config = self.config

        for key in keys[:-1]:
            if key not in config:
                config[key] = {}
            config = config[key]

        config[keys[-1]] = value

    def validate(self) -> bool:
        """Valide la configuration"""
        for key in ("app.name", "app.version"):
            if self.get(key) is None:
                return False

        positive = (
            "limits.enumeration",
            "limits.search_space",
            "limits.option_search",
            "votes.pairing_threshold",
            "workers",
        )
        for key in positive:
            value = self.get(key)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                return False

        return True

    @staticmethod
    def _parse_bool(value: str) -> bool:
        """Parse une chaîne en booléen"""
        return value.lower() in ("true", "1", "yes", "on")
