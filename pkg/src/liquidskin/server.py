"""HTTP session service exposing the simulator to interactive clients.

Each session owns a network snapshot and a live scenario whose samples are
produced on demand: a read at wall-clock time t materialises every sample up
to floor((t - t0) / samplePeriod), so the series is append-only and identical
no matter how often clients poll.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field, replace

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from . import files
from .circuit import ComplexZ, MaterialParams
from .errors import DomainError, LiquidSkinError
from .geometry import CellId, Network
from .logic import MultitouchConfig, config_from_protocol, realizable_gates, run_multitouch, threshold_gate
from .stimulus import (
    DisturbanceSettings,
    PerturbCoeffs,
    Press,
    Scenario,
    ScenarioEngine,
    family_map,
)

#: Upper bound of samples materialised per poll, to cap catch-up work.
MAX_CATCHUP_SAMPLES = 3000


@dataclass
class LivePress:
    cell: CellId
    mass_g: float
    t_on_s: float
    t_off_s: float | None = None


@dataclass
class Session:
    id: str
    network: Network
    material: MaterialParams
    coeffs: PerturbCoeffs
    pair: tuple[str, str]
    sample_period_s: float
    seed: int
    engine: ScenarioEngine
    started_monotonic: float
    presses: list[LivePress] = field(default_factory=list)
    samples: list[ComplexZ] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def press_tuple(self) -> tuple[Press, ...]:
        return tuple(
            Press(p.cell, p.mass_g, p.t_on_s, p.t_off_s if p.t_off_s is not None else 1e9)
            for p in self.presses
        )

    def advance_to(self, now_s: float) -> None:
        """Materialise every sample with index <= floor(now / period)."""
        head = int(now_s / self.sample_period_s)
        start = len(self.samples)
        if head - start >= MAX_CATCHUP_SAMPLES:
            start = head - MAX_CATCHUP_SAMPLES + 1
            self.samples.extend(
                [ComplexZ(0.0, 0.0)] * (start - len(self.samples))
            )
        presses = self.press_tuple()
        for k in range(start, head + 1):
            self.samples.append(self.engine.sample(k, presses))


def _bad_request(detail: str) -> HTTPException:
    return HTTPException(status_code=400, detail=detail)


def _field(body: dict, name: str, kind, default=None, required=False):
    if name not in body:
        if required:
            raise _bad_request(f"missing field {name!r}")
        return default
    value = body[name]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise _bad_request(f"field {name!r} has the wrong type")
    return value


async def _json_body(request: Request) -> dict:
    if not await request.body():
        return {}
    try:
        body = await request.json()
    except Exception as exc:
        raise _bad_request(f"body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise _bad_request("body must be a JSON object")
    return body


def create_app(clock=time.monotonic) -> FastAPI:
    """Build the service; ``clock`` is injectable for deterministic tests."""
    app = FastAPI(title="liquidskin", docs_url=None, redoc_url=None)
    sessions: dict[str, Session] = {}
    store_lock = threading.Lock()

    def get_session(session_id: str) -> Session:
        with store_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    @app.exception_handler(LiquidSkinError)
    async def domain_error_handler(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.post("/api/sessions", status_code=201)
    async def create_session(request: Request):
        body = await _json_body(request)
        seed = _field(body, "seed", int, 0)
        pair_text = _field(body, "pair", str, "BL-C")
        sample_period = float(_field(body, "samplePeriodS", (int, float), 0.2))
        noise = float(_field(body, "noiseSigmaOhm", (int, float), 2e-4))
        drift = float(_field(body, "driftSlopeOhmPerS", (int, float), 0.0))
        parts = pair_text.split("-")
        if len(parts) != 2:
            raise _bad_request("field 'pair' must look like BL-C")
        network = files.default_network()
        if tuple(parts) not in (
            ("BL", "C"), ("C", "BL"), ("BL", "TR"), ("TR", "BL"), ("C", "TR"), ("TR", "C")
        ):
            raise _bad_request(f"unknown electrode pair {pair_text!r}")
        if sample_period <= 0:
            raise _bad_request("field 'samplePeriodS' must be positive")
        material = MaterialParams()
        coeffs = PerturbCoeffs()
        scenario = Scenario(
            presses=(),
            duration_s=1e9,
            sample_period_s=sample_period,
            electrode_pair=(parts[0], parts[1]),
            disturbances=DisturbanceSettings(
                noise_sigma_ohm=noise, drift_slope_ohm_per_s=drift, drift_walk_sigma_ohm=0.0
            ),
            seed=seed,
        )
        session = Session(
            id=uuid.uuid4().hex,
            network=network,
            material=material,
            coeffs=coeffs,
            pair=(parts[0], parts[1]),
            sample_period_s=sample_period,
            seed=seed,
            engine=ScenarioEngine(network, material, coeffs, scenario),
            started_monotonic=clock(),
        )
        with store_lock:
            sessions[session.id] = session
        return {
            "id": session.id,
            "pair": pair_text,
            "samplePeriodS": sample_period,
            "seed": seed,
        }

    @app.get("/api/sessions/{session_id}/network")
    async def get_network(session_id: str):
        session = get_session(session_id)
        return files.network_to_doc(session.network)

    @app.post("/api/sessions/{session_id}/press")
    async def press(session_id: str, request: Request):
        session = get_session(session_id)
        body = await _json_body(request)
        label = _field(body, "cell", str, required=True)
        action = _field(body, "action", str, required=True)
        mass = float(_field(body, "mass_g", (int, float), 100.0))
        if action not in ("down", "up"):
            raise _bad_request("field 'action' must be 'down' or 'up'")
        if mass <= 0:
            raise _bad_request("field 'mass_g' must be positive")
        try:
            cell = CellId.parse(label)
        except DomainError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        now = clock() - session.started_monotonic
        with session.lock:
            session.advance_to(now)
            if action == "down":
                for p in session.presses:
                    if p.cell == cell and p.t_off_s is None:
                        raise _bad_request(f"cell {label} is already pressed")
                session.presses.append(LivePress(cell, mass, now))
            else:
                for p in reversed(session.presses):
                    if p.cell == cell and p.t_off_s is None:
                        p.t_off_s = now
                        break
                else:
                    raise _bad_request(f"cell {label} is not currently pressed")
        return {"cell": cell.label, "action": action, "mass_g": mass, "t_s": now}

    @app.get("/api/sessions/{session_id}/series")
    async def series(session_id: str, sinceSample: int = 0):
        session = get_session(session_id)
        if sinceSample < 0:
            raise _bad_request("sinceSample must be non-negative")
        now = clock() - session.started_monotonic
        with session.lock:
            session.advance_to(now)
            head = len(session.samples)
            page = session.samples[sinceSample:]
            out = [
                {
                    "index": sinceSample + i,
                    "t_s": (sinceSample + i) * session.sample_period_s,
                    "R_ohm": z.resistance,
                    "X_ohm": z.reactance,
                }
                for i, z in enumerate(page)
            ]
        return {"samples": out, "head": head, "samplePeriodS": session.sample_period_s}

    @app.get("/api/sessions/{session_id}/families")
    async def families(session_id: str, pair: str | None = None):
        session = get_session(session_id)
        pair_tuple = session.pair
        if pair is not None:
            parts = pair.split("-")
            if len(parts) != 2 or not all(p in session.network.electrodes for p in parts):
                raise _bad_request(f"unknown electrode pair {pair!r}")
            pair_tuple = (parts[0], parts[1])
        fam = family_map(session.network, pair_tuple)
        return {
            "pair": f"{pair_tuple[0]}-{pair_tuple[1]}",
            "families": {cell.label: f.name for cell, f in sorted(fam.items())},
        }

    @app.post("/api/sessions/{session_id}/logic")
    async def logic(session_id: str, request: Request):
        session = get_session(session_id)
        body = await _json_body(request)
        label_a = _field(body, "cellA", str)
        label_b = _field(body, "cellB", str)
        asset = files.paper_levels_asset()
        if label_a is None and label_b is None:
            # No cells given: reproduce the shipped paper-levels experiment.
            cell_a, cell_b = asset["cellA"], asset["cellB"]
            material, coeffs = asset["material"], asset["coeffs"]
            pair = asset["pair"]
            config = config_from_protocol(asset["protocol"])
        else:
            if label_a is None or label_b is None:
                raise _bad_request("provide both 'cellA' and 'cellB', or neither")
            try:
                cell_a, cell_b = CellId.parse(label_a), CellId.parse(label_b)
            except DomainError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            material, coeffs = session.material, asset["coeffs"]
            pair = session.pair
            config = config_from_protocol(asset["protocol"])
        if cell_a == cell_b:
            raise _bad_request("'cellA' and 'cellB' must differ")
        outputs, _ = run_multitouch(
            session.network, material, coeffs, pair, cell_a, cell_b, config
        )
        return {
            "cellA": cell_a.label,
            "cellB": cell_b.label,
            "outputs_ohm": {
                "O00": outputs.o00_ohm, "O01": outputs.o01_ohm,
                "O10": outputs.o10_ohm, "O11": outputs.o11_ohm,
            },
            "uncertainties_ohm": {
                "O00": outputs.u00_ohm, "O01": outputs.u01_ohm,
                "O10": outputs.u10_ohm, "O11": outputs.u11_ohm,
            },
            "realizableGates": sorted(g.name for g in realizable_gates(outputs)),
            "exampleThresholds": [
                {"T_ohm": t, "truthTable": list(threshold_gate(outputs, t).as_tuple()),
                 "gate": threshold_gate(outputs, t).name}
                for t in (0.13, 5.79)
            ],
        }

    @app.delete("/api/sessions/{session_id}", status_code=204)
    async def delete_session(session_id: str):
        get_session(session_id)
        with store_lock:
            sessions.pop(session_id, None)

    return app
