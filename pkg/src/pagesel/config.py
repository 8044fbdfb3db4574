"""Selection configuration and named budget presets."""

from dataclasses import dataclass, replace

from .errors import ConfigurationError

# Retention-ratio presets (grid, chunk, page). The product of a triple is the
# approximate semantic KV budget: 0.9^3 ~ 73%, 0.8*0.7*0.7 ~ 40%, 0.5*0.2*0.1 = 1%.
PRESETS = {
    "conservative": (0.9, 0.9, 0.9),
    "moderate": (0.8, 0.7, 0.7),
    "aggressive": (0.5, 0.2, 0.1),
}


@dataclass(frozen=True)
class SelectionConfig:
    """Knobs governing the page hierarchy and the pruning cascade.

    page_size: tokens per page (B).
    pages_per_chunk / chunks_per_grid: hierarchy fan-outs.
    rho_grid / rho_chunk / rho_page: retention ratios in (0, 1].
    window_pages: recent pages always kept and averaged into the anchor (W).
    sink_pages: leading pages always kept (attention sinks).
    """

    page_size: int = 32
    pages_per_chunk: int = 8
    chunks_per_grid: int = 8
    rho_grid: float = 0.5
    rho_chunk: float = 0.2
    rho_page: float = 0.1
    window_pages: int = 4
    sink_pages: int = 1

    def __post_init__(self):
        if self.page_size < 1:
            raise ConfigurationError(f"page_size must be >= 1, got {self.page_size}")
        if self.pages_per_chunk < 1 or self.chunks_per_grid < 1:
            raise ConfigurationError("hierarchy fan-outs must be >= 1")
        for name in ("rho_grid", "rho_chunk", "rho_page"):
            rho = getattr(self, name)
            if not 0.0 < rho <= 1.0:
                raise ConfigurationError(f"{name} must be in (0, 1], got {rho}")
        if self.window_pages < 1:
            raise ConfigurationError("window_pages must be >= 1")
        if self.sink_pages < 0:
            raise ConfigurationError("sink_pages must be >= 0")

    @property
    def ratios(self):
        return (self.rho_grid, self.rho_chunk, self.rho_page)


def preset_config(name, **overrides):
    """Build a SelectionConfig from a named ratio preset."""
    try:
        rg, rc, rp = PRESETS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None
    cfg = SelectionConfig(rho_grid=rg, rho_chunk=rc, rho_page=rp)
    return replace(cfg, **overrides) if overrides else cfg
