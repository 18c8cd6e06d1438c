"""Workflow configuration: INI file <-> validated, immutable ``PipelineConfig``.

File layout::

    [data]
    path = data/wisdm.csv
    separator = ,
    has_header = true
    header_type = tdcp
    sampling_frequency = 20

    [treatment]
    data_treatment = segmentation
    time_window = 10
    overlap = 0

    [preprocessing]
    normalization_method = robust

    [training]
    use_ml = kNN, RF

Every key lives in exactly one section (see ``SECTIONS``). Unknown sections
or keys are rejected. Omitted keys take the defaults in ``PipelineConfig``.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError

HEADER_TYPES = ("tdc", "tdcp", "dc", "dcp", "tdcps", "dcps")
GROUP_BY = ("CLASS", "P_ID")
TREATMENTS = ("segmentation", "raw", "features_extraction")
FEATURE_DOMAINS = ("statistical", "spectral", "temporal", "all")
ML_MODELS = ("kNN", "wkNN", "LDA", "QDA", "SVM", "RF", "DT")
DL_MODELS = ("CNN",)
NORMALIZATIONS = ("none", "minmax", "robust", "standard")
SPLIT_METHODS = ("intra", "inter")
SELECTION_METHODS = ("variance", "l1", "tree_based", "recursive")
BALANCING_METHODS = ("none", "random_under", "near_miss", "edited_nn",
                     "random_over", "smote", "adasyn", "kmeans_smote")
UNDER_METHODS = ("random_under", "near_miss", "edited_nn")
SUB_METHODS = ("mean", "forward", "backward", "constant", "interpolate")
FILTERS = ("none", "lowpass", "highpass", "bandpass", "bandstop")

SECTIONS = {
    "data": ("path", "separator", "has_header", "header_type",
             "sampling_frequency", "group_by"),
    "treatment": ("sub_method", "constant_value", "filter", "filter_order",
                  "cut", "data_treatment", "time_window", "overlap",
                  "features_domain", "export_representation"),
    "preprocessing": ("drop_subjects", "drop_activities", "drop_sessions",
                      "split_method", "test_size", "test_subjects",
                      "normalization_method", "features_selection",
                      "selection_method", "n_features_to_select",
                      "data_balancing_method"),
    "training": ("use_ml", "use_dl", "epochs", "k_fold", "loss_threshold",
                 "use_features", "seed"),
}
KEY_SECTION = {k: s for s, keys in SECTIONS.items() for k in keys}


class ConfigWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    path: str
    header_type: str
    separator: str = ","
    has_header: bool = True
    sampling_frequency: Optional[int] = None
    group_by: str = "CLASS"

    sub_method: str = "mean"
    constant_value: float = 0.0
    filter: str = "lowpass"
    filter_order: int = 4
    cut: tuple = (20.0,)
    data_treatment: str = "features_extraction"
    time_window: Optional[float] = None
    overlap: float = 0.0
    features_domain: str = "all"
    export_representation: bool = False

    drop_subjects: tuple = ()
    drop_activities: tuple = ()
    drop_sessions: tuple = ()
    split_method: str = "intra"
    test_size: float = 0.25
    test_subjects: tuple = ()
    normalization_method: str = "robust"
    # None means "follow data_treatment": on for features_extraction only.
    features_selection: Optional[bool] = None
    selection_method: str = "tree_based"
    n_features_to_select: Optional[int] = None
    data_balancing_method: str = "none"

    use_ml: tuple = ("kNN", "LDA", "QDA", "RF", "DT")
    use_dl: tuple = ("CNN",)
    epochs: int = 100
    k_fold: int = 3
    loss_threshold: float = 0.4
    use_features: bool = True
    seed: int = 0

    # populated by check(); not part of the file
    base_dir: Optional[str] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.features_selection is None:
            object.__setattr__(self, "features_selection",
                               self.data_treatment == "features_extraction")
        check(self)

    @property
    def window_samples(self) -> Optional[int]:
        if self.time_window is None or self.sampling_frequency is None:
            return None
        return int(round(self.time_window * self.sampling_frequency))

    @property
    def step_samples(self) -> Optional[int]:
        if self.time_window is None or self.sampling_frequency is None:
            return None
        return int(round((self.time_window - self.overlap) * self.sampling_frequency))

    @property
    def has_timestamps(self) -> bool:
        return self.header_type.startswith("t")

    @property
    def has_subjects(self) -> bool:
        return "p" in self.header_type

    @property
    def has_sessions(self) -> bool:
        return self.header_type.endswith("s")

    @property
    def dataset_path(self) -> Path:
        p = Path(self.path)
        if not p.is_absolute() and self.base_dir is not None:
            p = Path(self.base_dir) / p
        return p

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)


def _require(cond, key, constraint):
    if not cond:
        raise ConfigError(f"invalid value for '{key}': {constraint}")


def _enum(cfg, key, allowed):
    value = getattr(cfg, key)
    _require(value in allowed, key, f"must be one of {', '.join(allowed)} (got {value!r})")


def check(cfg: PipelineConfig):
    """Structural validation; raises ConfigError naming key and constraint."""
    _require(bool(cfg.path), "path", "must be non-empty")
    _require(len(cfg.separator) == 1, "separator", "must be a single character")
    _enum(cfg, "header_type", HEADER_TYPES)
    _enum(cfg, "group_by", GROUP_BY)
    _enum(cfg, "data_treatment", TREATMENTS)
    _enum(cfg, "features_domain", FEATURE_DOMAINS)
    _enum(cfg, "normalization_method", NORMALIZATIONS)
    _enum(cfg, "split_method", SPLIT_METHODS)
    _enum(cfg, "selection_method", SELECTION_METHODS)
    _enum(cfg, "data_balancing_method", BALANCING_METHODS)
    _enum(cfg, "sub_method", SUB_METHODS)
    _enum(cfg, "filter", FILTERS)
    for m in cfg.use_ml:
        _require(m in ML_MODELS, "use_ml", f"unknown model {m!r}; choose from {', '.join(ML_MODELS)}")
    for m in cfg.use_dl:
        _require(m in DL_MODELS, "use_dl", f"unknown model {m!r}; choose from {', '.join(DL_MODELS)}")
    _require(len(set(cfg.use_ml)) == len(cfg.use_ml), "use_ml", "duplicate model")
    _require(cfg.use_ml or cfg.use_dl, "use_ml", "at least one model must be enabled")

    if cfg.sampling_frequency is not None:
        _require(cfg.sampling_frequency > 0, "sampling_frequency", "must be a positive integer")
    if not cfg.has_timestamps:
        _require(cfg.sampling_frequency is not None, "sampling_frequency",
                 "required when the dataset has no timestamp column")

    if cfg.data_treatment != "raw":
        _require(cfg.time_window is not None, "time_window",
                 f"required for data_treatment={cfg.data_treatment}")
    if cfg.time_window is not None:
        _require(cfg.time_window > 0, "time_window", "must be positive")
        _require(cfg.overlap >= 0, "overlap", "must be >= 0")
        _require(cfg.overlap < cfg.time_window, "overlap", "overlap < time_window")
        if cfg.sampling_frequency is not None:
            _require(cfg.step_samples >= 1, "overlap",
                     "(time_window - overlap) * sampling_frequency must be >= 1 sample")

    _require(cfg.filter_order > 0, "filter_order", "must be a positive integer")
    if cfg.filter in ("lowpass", "highpass"):
        _require(len(cfg.cut) == 1, "cut", f"{cfg.filter} requires exactly one cutoff")
    elif cfg.filter in ("bandpass", "bandstop"):
        _require(len(cfg.cut) == 2, "cut", f"{cfg.filter} requires exactly two cutoffs")
        _require(cfg.cut[0] < cfg.cut[1], "cut", "low cutoff must be < high cutoff")
    if cfg.filter != "none":
        _require(all(c > 0 for c in cfg.cut), "cut", "cutoffs must be positive")
        if cfg.sampling_frequency is not None:
            nyq = cfg.sampling_frequency / 2
            _require(all(c < nyq for c in cfg.cut), "cut",
                     f"every cutoff must be < sampling_frequency/2 = {nyq:g} Hz (Nyquist)")

    _require(0 < cfg.test_size < 1, "test_size", "must lie in (0, 1)")
    _require(cfg.epochs > 0, "epochs", "must be a positive integer")
    _require(3 <= cfg.k_fold <= 10, "k_fold", "must lie in [3, 10]")
    _require(cfg.loss_threshold >= 0, "loss_threshold", "must be >= 0")

    if cfg.features_selection:
        _require(cfg.data_treatment == "features_extraction", "features_selection",
                 "feature selection requires data_treatment=features_extraction")
    if cfg.selection_method == "recursive" and cfg.features_selection:
        _require(cfg.n_features_to_select is not None, "n_features_to_select",
                 "required when selection_method=recursive")
    if cfg.n_features_to_select is not None:
        _require(cfg.n_features_to_select > 0, "n_features_to_select", "must be a positive integer")

    if cfg.drop_sessions:
        _require(cfg.has_sessions, "drop_sessions",
                 "session drops need a session column (header_type ending in 's')")
    if cfg.split_method == "inter":
        _require(cfg.has_subjects, "split_method",
                 "inter-subject split needs a subject column (header_type with 'p')")


def config_warnings(cfg: PipelineConfig) -> list:
    out = []
    if not 0.15 <= cfg.test_size <= 0.25:
        out.append(f"test_size={cfg.test_size} is outside the usual 0.15-0.25 range")
    if cfg.n_features_to_select is not None and cfg.selection_method != "recursive":
        out.append("n_features_to_select is only used with selection_method=recursive")
    if cfg.split_method == "intra" and cfg.test_subjects:
        out.append("test_subjects is ignored with split_method=intra")
    return out


# --------------------------------------------------------------------------
# parsing

_BOOL = {"true": True, "yes": True, "1": True, "on": True,
         "false": False, "no": False, "0": False, "off": False}
_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
_ID_LISTS = ("drop_subjects", "drop_activities", "drop_sessions", "test_subjects")


def _split_list(raw):
    return tuple(p.strip() for p in raw.replace(";", ",").split(",") if p.strip())


def _parse_value(key, raw):
    raw = raw.strip()
    try:
        if key in _ID_LISTS or key in ("use_ml", "use_dl"):
            return _split_list(raw)
        if key == "cut":
            return tuple(float(v) for v in _split_list(raw))
        if key == "selection_method":
            return raw.replace("-", "_")
        if key == "separator":
            return {"\\t": "\t", "tab": "\t", "comma": ",", "semicolon": ";",
                    "space": " "}.get(raw, raw)
        typ = _FIELD_TYPES[key]
        if "bool" in typ:
            return _BOOL[raw.lower()]
        if "int" in typ:
            return int(raw)
        if "float" in typ:
            return float(raw)
        return raw
    except (ValueError, KeyError):
        raise ConfigError(f"invalid value for '{key}': cannot parse {raw!r}") from None


def _parse_error(exc, source):
    if isinstance(exc, configparser.MissingSectionHeaderError):
        return ConfigError(f"{source}: parse error at line {exc.lineno}, column 1: "
                           f"expected a [section] header, got {exc.line.strip()!r}")
    if isinstance(exc, configparser.ParsingError):
        lineno, line = exc.errors[0]
        return ConfigError(f"{source}: parse error at line {lineno}, column 1: "
                           f"expected 'key = value', got {line.strip()!r}")
    if isinstance(exc, (configparser.DuplicateOptionError, configparser.DuplicateSectionError)):
        return ConfigError(f"{source}: parse error at line {exc.lineno}, column 1: {exc.message}")
    return ConfigError(f"{source}: parse error: {exc}")


def parse_config(text: str, source="<string>", base_dir=None) -> PipelineConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise _parse_error(exc, source) from None

    values = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]; expected one of "
                              + ", ".join(f"[{s}]" for s in SECTIONS))
        for key, raw in parser.items(section):
            if key not in KEY_SECTION:
                raise ConfigError(f"unknown key '{key}' in [{section}]")
            if KEY_SECTION[key] != section:
                raise ConfigError(f"key '{key}' belongs in [{KEY_SECTION[key]}], not [{section}]")
            values[key] = _parse_value(key, raw)
    for required in ("path", "header_type"):
        if required not in values:
            raise ConfigError(f"missing required key '{required}' in [{KEY_SECTION[required]}]")

    cfg = PipelineConfig(**values, base_dir=None if base_dir is None else str(base_dir))
    for msg in config_warnings(cfg):
        warnings.warn(msg, ConfigWarning, stacklevel=2)
    return cfg


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from None
    return parse_config(text, source=str(path), base_dir=path.resolve().parent)


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    if value == "\t":
        return "\\t"
    return str(value)


def to_ini(cfg: PipelineConfig) -> str:
    """Serialize every non-None key; ``parse_config(to_ini(c)) == c``."""
    lines = []
    for section, keys in SECTIONS.items():
        lines.append(f"[{section}]")
        for key in keys:
            value = getattr(cfg, key)
            if value is None:
                continue
            text = _format_value(value)
            lines.append(f"{key} = {text}")
        lines.append("")
    return "\n".join(lines)


def as_dict(cfg: PipelineConfig) -> dict:
    out = {}
    for f in dataclasses.fields(cfg):
        if f.name == "base_dir":
            continue
        v = getattr(cfg, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


# --------------------------------------------------------------------------
# cross-check against data

@dataclass(frozen=True)
class DatasetMeta:
    """What ``validate`` needs to know about a file before a full load."""
    n_columns: int
    column_names: tuple = ()
    inferred_sampling_frequency: Optional[float] = None


def required_columns(header_type: str) -> int:
    # every letter is one column except 'd', which stands for >= 1 columns
    return len(header_type)


def validate(cfg: PipelineConfig, meta: DatasetMeta) -> list:
    """Cross-check config against the dataset. Returns non-fatal warnings."""
    out = list(config_warnings(cfg))
    need = required_columns(cfg.header_type)
    if meta.n_columns < need:
        missing = []
        if cfg.has_subjects:
            missing.append("subject")
        if cfg.has_sessions:
            missing.append("session")
        hint = f" (no room for the {' / '.join(missing)} column)" if missing else ""
        raise ConfigError(f"header_type={cfg.header_type} needs at least {need} columns, "
                          f"dataset has {meta.n_columns}{hint}")
    fs = cfg.sampling_frequency
    if fs is None:
        fs = meta.inferred_sampling_frequency
        if fs is None:
            raise ConfigError("sampling_frequency is not set and cannot be inferred from timestamps")
    elif meta.inferred_sampling_frequency is not None:
        if not math.isclose(fs, meta.inferred_sampling_frequency, rel_tol=0.05):
            out.append(f"sampling_frequency={fs} differs from the timestamp rate "
                       f"{meta.inferred_sampling_frequency:g} Hz")
    if cfg.filter != "none":
        nyq = fs / 2
        bad = [c for c in cfg.cut if c >= nyq]
        if bad:
            raise ConfigError(f"invalid value for 'cut': {bad[0]:g} Hz >= Nyquist {nyq:g} Hz "
                              f"(sampling_frequency={fs:g})")
    return out
