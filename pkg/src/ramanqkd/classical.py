"""Classical coherent channel: BER curves, implementation penalty, sensitivity."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from scipy.special import erfc

REFERENCE_BAUD_GBAUD = 10.0
OOK_SENSITIVITY_DBM = -28.0
SENSITIVITY_TOL_DB = 0.01


class ModulationFormat(enum.Enum):
    PM_BPSK = "PM-BPSK"
    PM_QPSK = "PM-QPSK"
    PM_SP_8QAM = "PM-SP-8QAM"
    PM_16QAM = "PM-16QAM"
    OOK = "OOK"

    @classmethod
    def parse(cls, name: str) -> "ModulationFormat":
        key = name.strip().upper().replace("_", "-")
        for fmt in cls:
            if fmt.value == key:
                return fmt
        known = ", ".join(f.value for f in cls)
        raise ValueError(f"unknown modulation format {name!r}; known: {known}")

    @property
    def bits_per_symbol(self) -> int:
        # Both polarizations counted.
        return {"PM-BPSK": 2, "PM-QPSK": 4, "PM-SP-8QAM": 6, "PM-16QAM": 8, "OOK": 1}[self.value]


class UnreachableBER(ValueError):
    """The target BER lies below what the penalty ceiling allows."""


def ber(fmt: ModulationFormat, snr: float) -> float:
    """Bit error ratio at linear electrical SNR ``snr``."""
    if not snr > 0:
        raise ValueError(f"snr must be > 0 (linear), got {snr}")
    if fmt is ModulationFormat.OOK:
        raise ValueError(
            "OOK has no BER curve in this model; use OOK_SENSITIVITY_DBM "
            "or set rx_sensitivity_dbm explicitly"
        )
    if fmt is ModulationFormat.PM_BPSK:
        return 0.5 * erfc(math.sqrt(snr))
    if fmt is ModulationFormat.PM_QPSK:
        return 0.5 * erfc(math.sqrt(snr / 2.0))
    if fmt is ModulationFormat.PM_SP_8QAM:
        return 0.5 * erfc(math.sqrt(snr / 5.0))
    return 0.375 * erfc(math.sqrt(snr / 10.0))


@dataclass(frozen=True)
class PenaltyModel:
    alpha_N: float = 0.0
    beta_lin: float = 0.0
    shot_noise_dbm: float = -58.5

    def __post_init__(self) -> None:
        if self.alpha_N < 0 or self.beta_lin < 0:
            raise ValueError("alpha_N and beta_lin must be >= 0")

    @property
    def snr_ceiling(self) -> float:
        return math.inf if self.beta_lin == 0 else 1.0 / self.beta_lin


IDEAL = PenaltyModel(0.0, 0.0)
MEASURED = PenaltyModel(1.07, 0.0075)


class FecKind(enum.Enum):
    HD = "hd"
    SD = "sd"
    NONE = "none"


_FEC_BER = {FecKind.HD: 10.0**-3.0, FecKind.SD: 10.0**-2.4, FecKind.NONE: 1e-12}


@dataclass(frozen=True)
class FecThreshold:
    kind: FecKind
    input_ber: float

    def __post_init__(self) -> None:
        if not 0 < self.input_ber < 0.5:
            raise ValueError(f"input_ber must lie in (0, 0.5), got {self.input_ber}")

    @classmethod
    def of(cls, kind: str | FecKind) -> "FecThreshold":
        k = kind if isinstance(kind, FecKind) else FecKind(str(kind).lower())
        return cls(k, _FEC_BER[k])


def snr_from_power(p_dbm: float, shot_noise_dbm: float = -58.5) -> float:
    return 10.0 ** ((p_dbm - shot_noise_dbm) / 10.0)


def effective_snr(snr_measured: float, penalty: PenaltyModel) -> float:
    if not snr_measured > 0:
        raise ValueError(f"snr_measured must be > 0, got {snr_measured}")
    return snr_measured / (1.0 + penalty.alpha_N + penalty.beta_lin * snr_measured)


def receiver_sensitivity(
    fmt: ModulationFormat,
    fec: FecThreshold,
    penalty: PenaltyModel = MEASURED,
    baud_gbaud: float = REFERENCE_BAUD_GBAUD,
    tol_db: float = SENSITIVITY_TOL_DB,
) -> float:
    """Smallest received power in dBm that meets the FEC input BER.

    The shot-noise floor scales with symbol rate relative to 10 Gbaud.
    OOK returns the fixed ``OOK_SENSITIVITY_DBM``.
    """
    if fmt is ModulationFormat.OOK:
        return OOK_SENSITIVITY_DBM
    if not baud_gbaud > 0:
        raise ValueError(f"baud_gbaud must be > 0, got {baud_gbaud}")
    floor = penalty.shot_noise_dbm + 10.0 * math.log10(baud_gbaud / REFERENCE_BAUD_GBAUD)
    target = fec.input_ber

    ceiling = penalty.snr_ceiling
    if math.isfinite(ceiling) and ber(fmt, ceiling) >= target:
        raise UnreachableBER(
            f"{fmt.value} cannot reach BER {target:.3g}: penalty caps the SNR at "
            f"{ceiling:.4g} ({10 * math.log10(ceiling):.2f} dB), where BER is "
            f"{ber(fmt, ceiling):.3g}"
        )

    def excess(p_dbm: float) -> float:
        return ber(fmt, effective_snr(snr_from_power(p_dbm, floor), penalty)) - target

    lo, hi = floor - 40.0, floor + 40.0
    while excess(hi) > 0:
        hi += 40.0
    # Keep the passing end so the returned power always meets the target.
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def launch_and_output_power(
    rx_sensitivity_dbm: float,
    il_db: float,
    il_fbg_db: float,
    alpha_db_per_km: float,
    length_km: float,
) -> tuple[float, float]:
    """Classical power at the fiber output and input, both dBm."""
    p_out = rx_sensitivity_dbm + il_db + il_fbg_db
    return p_out, p_out + alpha_db_per_km * length_km


def capacity_equivalent_count(fmt: ModulationFormat, n_16qam: int = 1) -> int:
    """Channels of ``fmt`` carrying the same bit rate as ``n_16qam`` PM-16QAM channels."""
    per = ModulationFormat.PM_16QAM.bits_per_symbol
    return n_16qam * per // fmt.bits_per_symbol


def snr_from_osnr(
    osnr_db: float, baud_gbaud: float, res_bw_ghz: float = 12.5, n_pol: int = 2
) -> float:
    """Electrical SNR from OSNR measured in a reference bandwidth.

    Conversion helper only; the pipeline uses the shot-noise path.
    """
    osnr = 10.0 ** (osnr_db / 10.0)
    return osnr * 2.0 * res_bw_ghz / (n_pol * baud_gbaud)


@dataclass(frozen=True)
class ClassicalChannelPlan:
    format: ModulationFormat = ModulationFormat.PM_QPSK
    baud_gbaud: float = 10.0
    fec: FecThreshold = field(default_factory=lambda: FecThreshold.of("sd"))
    penalty: PenaltyModel = MEASURED
    n_forward: int = 0
    n_backward: int = 0
    rx_sensitivity_dbm: float | None = None
    il_db: float = 0.0
    il_fbg_db: float = 0.0
    iso_adjacent_db: float = 82.0
    iso_nonadjacent_db: float = 100.0

    def __post_init__(self) -> None:
        if self.n_forward < 0 or self.n_backward < 0:
            raise ValueError("channel counts must be >= 0")
        if not (self.iso_adjacent_db > 0 and self.iso_nonadjacent_db > 0):
            raise ValueError("isolations must be > 0 dB")

    @property
    def has_channels(self) -> bool:
        return self.n_forward + self.n_backward > 0

    def resolved_sensitivity(self) -> float:
        if self.rx_sensitivity_dbm is not None:
            return self.rx_sensitivity_dbm
        return receiver_sensitivity(self.format, self.fec, self.penalty, self.baud_gbaud)
