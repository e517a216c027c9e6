"""Command-line front end.

The CLI is a thin client of the HTTP service: by default it mounts the
service in-process over an ASGI transport, and --url points the same
commands at a remote instance.  Exit status encodes the outcome:
0 all checks passed, 1 a verification failed, 2 the request itself was
unusable (bad config, bad arguments, unknown suite).
"""

import argparse
import asyncio
import json
import sys

import httpx

from .scenarios import ENGINE_VERSION, ScenarioError, load_scenario_file

USAGE_EXIT = 2


def _post(url, path, payload) -> httpx.Response:
    if url:
        with httpx.Client(base_url=url.rstrip("/"), timeout=600.0) as client:
            return client.post(path, json=payload)

    from .service import create_app

    async def go():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
                transport=transport, base_url="http://stardeform") as client:
            return await client.post(path, json=payload, timeout=None)

    return asyncio.run(go())


def _render(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(resp, report_path) -> int:
    if resp.status_code == 400:
        detail = resp.json().get("detail", "bad request")
        print(f"error: {detail}", file=sys.stderr)
        return USAGE_EXIT
    if resp.status_code == 422:
        print(f"error: invalid request: {resp.text}", file=sys.stderr)
        return USAGE_EXIT
    resp.raise_for_status()
    body = resp.json()
    text = _render(body["report"])
    sys.stdout.write(text)
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if body["passed"] else 1


def _cmd_run(args) -> int:
    scenario = load_scenario_file(args.scenario)
    req = {"scenario": scenario, "order": args.order, "seed": args.seed,
           "timings": args.timings}
    return _emit(_post(args.url, "/run", req), args.report)


def _cmd_check(args) -> int:
    req = {"suite": args.suite, "seed": args.seed, "timings": args.timings}
    return _emit(_post(args.url, "/check", req), args.report)


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stardeform",
        description="exact deformation-quantization checks")
    parser.add_argument("--version", action="version",
                        version=f"stardeform {ENGINE_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", help="path to a scenario JSON file")
    run.add_argument("--order", type=int, default=None,
                     help="override the truncation order")
    run.add_argument("--seed", type=int, default=None,
                     help="override the sampling seed")
    run.add_argument("--report", default=None,
                     help="also write the report to this path")
    run.add_argument("--timings", action="store_true",
                     help="include per-task wall time (breaks "
                          "byte-for-byte report reproducibility)")
    run.add_argument("--url", default=None,
                     help="send the request to a running service instead")
    run.set_defaults(fn=_cmd_run)

    check = sub.add_parser("check", help="run a built-in suite")
    check.add_argument("--suite", required=True,
                       help="algebra, matrix, module, semiclassical, "
                            "morita, or all")
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--report", default=None,
                       help="also write the report to this path")
    check.add_argument("--timings", action="store_true")
    check.add_argument("--url", default=None)
    check.set_defaults(fn=_cmd_check)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(fn=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_EXIT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
