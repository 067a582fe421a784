"""
Configuration centralisée de la boîte à outils
"""

from pathlib import Path
from typing import Any, Optional
import json
import os
from datetime import datetime

from dotenv import load_dotenv

from src.errors import ConfigError


ENV_PREFIX = "NCT_"


class Config:
    """Gestion de la configuration (budgets, énumération, tours, journalisation)"""

    def __init__(self, config_path: Optional[str] = None):
        self.base_dir = Path(__file__).parent.parent

        # Chemins des répertoires
        self.fixtures_dir = self.base_dir / "fixtures"
        self.output_path = self.base_dir / "outputs"

        self._set_defaults()

        # Charger la config depuis fichier si fourni, puis l'environnement
        if config_path:
            self._load_config(config_path)
        self._load_env()

    def _set_defaults(self):
        """Configuration par défaut"""

        # Budgets
        self.group_order_budget = 20000
        self.automorphism_budget = 64
        self.isomorphism_budget = 2000
        self.section_budget = 5000

        # Coset enumeration
        self.max_cosets = 200000
        self.coset_strategy = "hlt"
        self.closure_coset_strategy = "felsch"

        # Towers
        self.closures_max_steps = 16
        self.normalizers_max_steps = 32

        # Validation
        self.full_check_order = 256
        self.random_triples = 2000
        self.random_seed = 0
        self.uniqueness_limit = 10000
        self.oracle_limit = 12
        self.verify_tower_order = 64

        # Logging
        self.log_level = "WARNING"

    def _check_key(self, key: str):
        if key.startswith("_") or not hasattr(self, key):
            raise ConfigError(f"clé de configuration inconnue: {key}")

    def _load_config(self, config_path: str):
        """Charge la config depuis un fichier JSON"""
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                config_data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"configuration illisible: {config_path}: {e}") from e

        # Mettre à jour les attributs
        for key, value in config_data.items():
            self._check_key(key)
            setattr(self, key, value)

    def _load_env(self):
        """Surcharge par variables d'environnement (fichier .env compris)"""
        load_dotenv()
        for name, raw in os.environ.items():
            if not name.startswith(ENV_PREFIX):
                continue
            key = name[len(ENV_PREFIX):].lower()
            self._check_key(key)
            setattr(self, key, self._coerce(key, raw))

    def _coerce(self, key: str, raw: str) -> Any:
        current = getattr(self, key)
        if isinstance(current, Path):
            return Path(raw)
        if isinstance(current, int):
            try:
                return int(raw)
            except ValueError as e:
                raise ConfigError(f"{key}: entier attendu, reçu {raw!r}") from e
        return raw

    def save_config(self, output_path: str):
        """Sauvegarde la configuration actuelle"""
        config_dict = {
            k: v for k, v in self.__dict__.items()
            if not k.startswith('_') and not isinstance(v, Path)
        }

        with open(output_path, 'w', encoding='utf-8') as f:
            json.dump(config_dict, f, indent=2, ensure_ascii=False)

    @staticmethod
    def get_timestamp() -> str:
        """Retourne un timestamp formaté"""
        return datetime.now().strftime("%Y%m%d_%H%M%S")

    def report_path(self, command: str) -> Path:
        """Chemin par défaut d'un rapport JSON (répertoire créé à la demande)"""
        self.output_path.mkdir(exist_ok=True)
        return self.output_path / f"{command}_{self.get_timestamp()}.json"


_current: Optional[Config] = None


def get_config() -> Config:
    """Instance par défaut, partagée par les fonctions de la bibliothèque"""
    global _current
    if _current is None:
        _current = Config()
    return _current


def use_config(config: Optional[Config]) -> Optional[Config]:
    """Remplace l'instance par défaut (None: rechargée au prochain accès); renvoie la précédente"""
    global _current
    previous, _current = _current, config
    return previous


def setting(value: Any, key: str) -> Any:
    """Valeur explicite si fournie, sinon celle de la configuration par défaut"""
    return value if value is not None else getattr(get_config(), key)
