"""Command-line client for the interpolation service.

Every subcommand talks to the HTTP API: against a remote server when
``--server`` is given, otherwise against the application mounted
in-process (same wire format, no daemon required).  Files named on the
command line are read and written locally; the service itself only
touches the vector cache directory, which lives next to the computation.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

_LOCAL_BASE = "http://latkern.internal"

_CONFIG_KEYS = (
    "theta", "c_over_sqrt6", "p", "s", "weights", "n", "mesh_exponent",
    "L", "seed", "sobol_path", "vector_cache", "out", "eval_source",
)

_DEFAULTS = {
    "theta": 3.6,
    "c_over_sqrt6": 0.2,
    "p": 1.0 / 3.3,
    "s": 10,
    "weights": "serendipitous",
    "n": "16,32,64,128,256",
    "mesh_exponent": 5,
    "L": 100,
    "seed": 0,
    "sobol_path": None,
    "vector_cache": None,
    "out": None,
    "eval_source": "sobol",
}


class ServiceError(RuntimeError):
    pass


class ServiceClient:
    """Minimal JSON-over-HTTP client with an in-process fallback."""

    def __init__(self, server: str | None = None):
        self.server = server

    def post(self, path: str, payload: dict) -> dict:
        if self.server is not None:
            with httpx.Client(base_url=self.server, timeout=None) as client:
                response = client.post(path, json=payload)
        else:
            response = asyncio.run(self._local("POST", path, payload))
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(f"{path}: {detail}")
        return response.json()

    async def _local(self, method: str, path: str, payload: dict):
        from .service.app import create_app

        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url=_LOCAL_BASE, timeout=None
        ) as client:
            return await client.request(method, path, json=payload)


def _parse_n_list(value) -> list:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(tok) for tok in str(value).split(",") if tok.strip()]


def _load_settings(args: argparse.Namespace) -> dict:
    """Defaults, overlaid by the JSON config file, overlaid by CLI flags."""
    settings = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        unknown = set(loaded) - set(_CONFIG_KEYS)
        if unknown:
            raise ServiceError(
                f"unknown config keys {sorted(unknown)}; valid keys are "
                f"{list(_CONFIG_KEYS)}"
            )
        settings.update(loaded)
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    return settings


def _problem_payload(settings: dict) -> dict:
    return {
        "theta": float(settings["theta"]),
        "c_over_sqrt6": float(settings["c_over_sqrt6"]),
        "p": float(settings["p"]),
        "s": int(settings["s"]),
    }


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--server", help="base URL of a running service; "
                        "default runs the service in-process")
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--theta", type=float)
    parser.add_argument("--c-over-sqrt6", dest="c_over_sqrt6", type=float,
                        help="fluctuation magnitude as c*sqrt(6)")
    parser.add_argument("--p", type=float)
    parser.add_argument("--s", type=int)
    parser.add_argument("--weights",
                        choices=["spod", "serendipitous", "product"])


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_cbc(args) -> int:
    settings = _load_settings(args)
    payload = _problem_payload(settings)
    payload.update({
        "n": int(args.n),
        "weights": settings["weights"],
        "lambda_power": bool(args.lambda_power),
        "order_factor": bool(args.order_factor),
    })
    result = ServiceClient(args.server).post("/cbc", payload)
    print(f"n={result['n']} s={result['s']} criterion={result['criterion']:.6e} "
          f"({result['seconds']:.2f}s)")
    print("z =", " ".join(str(v) for v in result["z"]))
    if settings["out"]:
        from .lattice import GeneratingVector, save_vector

        save_vector(GeneratingVector(n=result["n"], z=result["z"]), settings["out"])
        print(f"wrote {settings['out']}")
    return 0


def cmd_convergence(args) -> int:
    settings = _load_settings(args)
    payload = _problem_payload(settings)
    payload.update({
        "weights": settings["weights"],
        "n": _parse_n_list(settings["n"]),
        "mesh_exponent": int(settings["mesh_exponent"]),
        "L": int(settings["L"]),
        "eval_source": settings["eval_source"],
        "seed": int(settings["seed"]),
        "sobol_path": settings["sobol_path"],
        "vector_cache": settings["vector_cache"],
    })
    result = ServiceClient(args.server).post("/convergence", payload)
    for record in result["records"]:
        error = record["error"]
        shown = f"{error:.6e}" if error is not None else "failed"
        print(f"n={record['n']:>6}  error={shown:>14}  "
              f"{record['seconds']:7.2f}s  {record['status']}")
    if result["rate"]:
        print(f"fitted slope {result['rate']['slope']:+.3f} "
              f"(theoretical {result['rate']['theoretical']:+.3f})")
    out = settings["out"] or "convergence.csv"
    Path(out).write_text(result["csv"], encoding="utf-8")
    print(f"wrote {out}")
    return 0


def cmd_transform_check(args) -> int:
    result = ServiceClient(args.server).post(
        "/checks/transform", {"samples": args.samples, "seed": args.seed}
    )
    print(f"sup CDF distance over {result['samples']} samples: "
          f"{result['distance']:.6f} (tolerance {result['tolerance']})")
    print("PASS" if result["passed"] else "FAIL")
    return 0 if result["passed"] else 1


def cmd_fem_check(args) -> int:
    exponents = _parse_n_list(args.mesh_exponents)
    result = ServiceClient(args.server).post(
        "/checks/fem", {"mesh_exponents": exponents}
    )
    for m, err in result["errors"].items():
        print(f"m={m}: L2 error {err:.6e}")
    for pair, ratio in result["ratios"].items():
        print(f"refinement {pair}: ratio {ratio:.3f}")
    print("PASS" if result["passed"] else "FAIL")
    return 0 if result["passed"] else 1


def cmd_kernel_check(args) -> int:
    result = ServiceClient(args.server).post("/checks/kernel", {"seed": args.seed})
    for alpha, info in result["fourier"].items():
        print(f"alpha={alpha}: Fourier deviation {info['max_deviation']:.3e} "
              f"(tolerance {info['tolerance']:g})")
    for name, info in result["dense_solve"].items():
        print(f"{name}: dense-solve relative error {info['relative_error']:.3e} "
              f"(tolerance {info['tolerance']:g})")
    print("PASS" if result["passed"] else "FAIL")
    return 0 if result["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latkern",
        description="lattice kernel interpolation service client",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)
    serve.set_defaults(func=cmd_serve)

    cbc = sub.add_parser("cbc", help="build (and cache) a generating vector")
    _add_common(cbc)
    cbc.add_argument("--n", type=int, required=True)
    cbc.add_argument("--out", help="write the vector file here")
    cbc.add_argument("--lambda-power", action="store_true",
                     help="search with the weights raised to lambda")
    cbc.add_argument("--order-factor", action="store_true",
                     help="use the max(|u|,1) criterion variant")
    cbc.set_defaults(func=cmd_cbc)

    conv = sub.add_parser("convergence", help="run a convergence experiment")
    _add_common(conv)
    conv.add_argument("--n", help="comma list of point counts")
    conv.add_argument("--mesh-exponent", dest="mesh_exponent", type=int)
    conv.add_argument("--L", type=int)
    conv.add_argument("--seed", type=int)
    conv.add_argument("--sobol-path", dest="sobol_path")
    conv.add_argument("--eval-source", dest="eval_source",
                      choices=["sobol", "uniform"])
    conv.add_argument("--vector-cache", dest="vector_cache")
    conv.add_argument("--out", help="CSV output path (default convergence.csv)")
    conv.set_defaults(func=cmd_convergence)

    tc = sub.add_parser("transform-check",
                        help="periodic transform distribution statistic")
    tc.add_argument("--server")
    tc.add_argument("--samples", type=int, default=100_000)
    tc.add_argument("--seed", type=int, default=0)
    tc.set_defaults(func=cmd_transform_check)

    fc = sub.add_parser("fem-check", help="manufactured-solution FEM order")
    fc.add_argument("--server")
    fc.add_argument("--mesh-exponents", default="3,4,5")
    fc.set_defaults(func=cmd_fem_check)

    kc = sub.add_parser("kernel-check", help="kernel oracle suite")
    kc.add_argument("--server")
    kc.add_argument("--seed", type=int, default=0)
    kc.set_defaults(func=cmd_kernel_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ServiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
