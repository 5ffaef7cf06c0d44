"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all engine errors."""

    code = "engine_error"


class AdapterUnavailable(EngineError):
    code = "adapter_unavailable"


class CapabilityMissing(EngineError):
    code = "capability_missing"


class Busy(EngineError):
    """A generation is already in flight for this session."""

    code = "busy"


class EmptyQuestion(EngineError):
    code = "empty_question"


class EmptyQuery(EngineError):
    code = "empty_query"


class NoGuidanceAvailable(EngineError):
    code = "no_guidance_available"


class UnknownTurn(EngineError):
    code = "unknown_turn"


class StepOutOfRange(EngineError):
    code = "step_out_of_range"


class MissingRequiredInput(EngineError):
    code = "missing_required_input"


class SlotBundleMismatch(EngineError):
    code = "slot_bundle_mismatch"


class ProviderError(EngineError):
    code = "provider_error"


class ProviderTimeout(ProviderError):
    code = "provider_timeout"


class Cancelled(EngineError):
    code = "cancelled"


class DimMismatch(EngineError):
    code = "dim_mismatch"


class IndexNotLoaded(EngineError):
    code = "index_not_loaded"


class ManifestMismatch(EngineError):
    code = "manifest_mismatch"


class CorruptFile(EngineError):
    code = "corrupt_file"


class ScenarioError(EngineError):
    code = "scenario_error"
