"""
Configuration management for the BNRA toolkit
"""
from pydantic_settings import BaseSettings
from pydantic import field_validator


class Settings(BaseSettings):
    """Toolkit settings"""
    
    # Diagnostics
    debug: bool = False
    log_level: str = "INFO"
    log_json: bool = False  # JSON log lines on stderr instead of the console renderer
    
    # Bounded explorer defaults
    explore_max_states: int = 200_000
    explore_workers: int = 1
    explore_canonical_mode: str = "values-only"  # "values-only" or "values-and-agents"
    
    # 1-register decider
    concretize_budget: int = 64  # max agents spawned by concretize
    
    # Reductions and transforms
    local_equality_max_registers: int = 4  # state blow-up is r^r * |Q|
    sat_max_variables: int = 20
    minsky_max_steps: int = 64
    minsky_max_counter: int = 8
    lcs_max_steps: int = 16
    lcs_max_channel: int = 6
    
    @field_validator('explore_canonical_mode', mode='before')
    @classmethod
    def parse_canonical_mode(cls, v):
        """Accept both dashed and underscored spellings"""
        if isinstance(v, str):
            normalized = v.strip().lower().replace('_', '-')
            if normalized not in ("values-only", "values-and-agents"):
                raise ValueError(f"unknown canonical mode: {v}")
            return normalized
        return v
    
    @field_validator('log_level', mode='before')
    @classmethod
    def parse_log_level(cls, v):
        """Normalize log level names"""
        if isinstance(v, str):
            return v.strip().upper()
        return v
    
    class Config:
        env_prefix = "BNRA_"
        env_file = ".env"
        case_sensitive = False


settings = Settings()
