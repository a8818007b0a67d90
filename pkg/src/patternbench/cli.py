"""Command-line client for the workbench service.

The CLI is a thin client: every command issues HTTP requests, either to a
running server (--server URL) or to an in-process app built from the same
configuration flags the server takes. Usage errors exit 2, domain errors
exit 1.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import click

from .model import STEP_ORDER
from .service import Config, create_app

STEP_NAMES = [step.value.replace("_", "-") for step in STEP_ORDER]
RENDER_KINDS = ["pattern", "language", "matrix", "story", "log", "shortform"]
EDIT_FIELDS = [
    "context",
    "problem",
    "forces",
    "solution_statement",
    "solution_detail",
    "known_uses",
    "resulting_context",
]


@dataclass
class Api:
    """Minimal JSON-over-HTTP caller shared by remote and in-process modes."""

    http: Any
    session_id: str | None = None

    def call(self, method: str, path: str, **kwargs: Any) -> dict[str, Any]:
        response = self.http.request(method, path, **kwargs)
        if response.status_code >= 400:
            try:
                data = response.json()
            except ValueError:
                data = {}
            error = data.get("error", f"HTTP {response.status_code}")
            detail = data.get("detail", response.text.strip())
            raise click.ClickException(f"{error}: {detail}")
        return response.json()

    def session(self) -> str:
        """The session to operate on: --session, or the only one that exists."""
        if self.session_id:
            return self.session_id
        ids = self.call("GET", "/sessions")["sessions"]
        if len(ids) == 1:
            return ids[0]
        if not ids:
            raise click.UsageError("no sessions exist yet; run `init` first")
        raise click.UsageError(f"several sessions exist ({', '.join(ids)}); pick one with --session")


def _build_api(server: str | None, session_id: str | None, config: Config) -> Api:
    if server:
        import httpx

        return Api(httpx.Client(base_url=server.rstrip("/"), timeout=120.0), session_id)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    return Api(TestClient(create_app(config)), session_id)


@click.group()
@click.option("--server", default=None, metavar="URL", help="Talk to a running service instead of in-process.")
@click.option("--session", "session_id", default=None, help="Session id; defaults to the only existing session.")
@click.option("--data-dir", default=None, help="Session directory (default: ./sessions).")
@click.option("--mode", type=click.Choice(["live", "record", "replay"]), default=None, help="Gateway mode.")
@click.option("--fixture", default=None, help="Replay/record fixture path.")
@click.option("--endpoint", default=None, help="Chat-completion endpoint for live/record modes.")
@click.option("--model", default=None, help="Model id for live/record modes.")
@click.pass_context
def main(ctx, server, session_id, data_dir, mode, fixture, endpoint, model):
    """Mine design patterns from worked examples with an AI in the loop."""
    config = Config.from_env(
        data_dir=data_dir, mode=mode, fixture_path=fixture, endpoint=endpoint, model_id=model
    )
    ctx.obj = {"server": server, "session_id": session_id, "config": config}


def _api(ctx) -> Api:
    obj = ctx.obj
    return _build_api(obj["server"], obj["session_id"], obj["config"])


def _print_diagnostics(entry: dict[str, Any]) -> None:
    for diag in entry.get("diagnostics", []):
        click.echo(f"  [{diag['severity']}] {diag['message']}")


def _describe_step(entry: dict[str, Any]) -> None:
    step = entry["step"]
    artifacts = entry["artifacts"]
    click.echo(f"{step}: {entry['status']}")
    if step == "extract_solutions":
        for solution in artifacts["solutions"]:
            click.echo(f"  {solution['name']}")
    elif step == "define_problems":
        click.echo(f"  {len(artifacts['problems'])} problem statements")
    elif step == "distill_patterns":
        for pattern in artifacts["patterns"]:
            click.echo(f"  {pattern['name']}")
    elif step == "identify_affordances":
        for affordance in artifacts["registry"]:
            click.echo(f"  [{affordance['component']}] {affordance['name']}")
    elif step == "relate_affordances":
        cells = sum(sum(1 for v in row if v) for row in artifacts["matrix"]["cells"])
        click.echo(f"  {cells} affordance uses marked")
    elif step == "refine":
        for pattern in artifacts["patterns"]:
            if pattern["status"] != "dropped":
                targets = [edge["target"] for edge in pattern["resulting_context"]] or (
                    ["(none)"] if pattern["resulting_context_none"] else ["(unset)"]
                )
                click.echo(f"  {pattern['name']} -> {', '.join(targets)}")
        if artifacts["missing_suggestions"]:
            click.echo(f"  suggested additions: {', '.join(artifacts['missing_suggestions'])}")
    elif step == "consolidate":
        click.echo("  patterns consolidated; generate stories and render the language")
    _print_diagnostics(entry)


def _cursor(session: dict[str, Any]) -> str:
    for step in STEP_ORDER:
        if session["step_status"].get(step.value) != "approved":
            return step.value
    return "(all approved)"


@main.command()
@click.option("--demo", is_flag=True, help="Preload the packaged worked-example session.")
@click.pass_context
def init(ctx, demo):
    """Create a new session."""
    api = _api(ctx)
    body: dict[str, Any] = {"demo": demo}
    if ctx.obj["session_id"]:
        body["session_id"] = ctx.obj["session_id"]
    data = api.call("POST", "/sessions", json=body)
    session = data["session"]
    click.echo(f"created session {session['id']}")
    if demo:
        live = [p["name"] for p in session["patterns"] if p["status"] != "dropped"]
        click.echo(f"patterns: {', '.join(live)}")


@main.command("add-example")
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.pass_context
def add_example(ctx, file: Path):
    """Ingest one example narrative (plain text or front-matter markdown)."""
    api = _api(ctx)
    text = file.read_text(encoding="utf-8")
    fallback = file.stem.replace("-", " ").replace("_", " ").strip().title()
    data = api.call(
        "POST",
        f"/sessions/{api.session()}/examples",
        json={"examples": [{"text": text, "name": fallback}], "append": True},
    )
    names = [ku["name"] for ku in data["session"]["known_uses"]]
    click.echo(f"examples: {', '.join(names)}")


@main.command()
@click.argument("step", type=click.Choice(STEP_NAMES))
@click.pass_context
def run(ctx, step):
    """Run a pipeline step; its output then awaits review."""
    api = _api(ctx)
    data = api.call("POST", f"/sessions/{api.session()}/steps/{step}/run")
    _describe_step(data["step"])


@main.command()
@click.argument("step", type=click.Choice(STEP_NAMES))
@click.pass_context
def approve(ctx, step):
    """Accept a step's output and unlock the next step."""
    api = _api(ctx)
    data = api.call("POST", f"/sessions/{api.session()}/steps/{step}/approve")
    click.echo(f"approved {step}; next: {_cursor(data['session'])}")


@main.command()
@click.argument("step", type=click.Choice(STEP_NAMES))
@click.pass_context
def rerun(ctx, step):
    """Run an already-run step again; later steps become stale."""
    api = _api(ctx)
    data = api.call("POST", f"/sessions/{api.session()}/steps/{step}/rerun")
    _describe_step(data["step"])
    stale = [s for s, status in data["session"]["step_status"].items() if status == "stale"]
    if stale:
        click.echo(f"stale: {', '.join(stale)}")


@main.command()
@click.argument("old")
@click.argument("new")
@click.option("--reason", default="", help="Recorded in the audit log.")
@click.pass_context
def rename(ctx, old, new, reason):
    """Rename a pattern everywhere it is referenced."""
    api = _api(ctx)
    api.call("POST", f"/sessions/{api.session()}/patterns/{old}/rename", json={"new_name": new, "reason": reason})
    click.echo(f"renamed {old!r} -> {new!r}")


@main.command()
@click.argument("name")
@click.option("--reason", default="", help="Recorded in the audit log.")
@click.pass_context
def drop(ctx, name, reason):
    """Retire a pattern; references to it are cleaned up."""
    api = _api(ctx)
    api.call("POST", f"/sessions/{api.session()}/patterns/{name}/drop", json={"reason": reason})
    click.echo(f"dropped {name!r}")


@main.command()
@click.argument("pattern")
@click.argument("field", type=click.Choice(EDIT_FIELDS))
@click.option("--text", default=None, help="New field text; omit to read stdin or --file.")
@click.option("--file", "file_", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--actor", type=click.Choice(["human", "ai"]), default="human")
@click.pass_context
def edit(ctx, pattern, field, text, file_, actor):
    """Replace one field of a pattern; provenance follows the actor."""
    if text is None:
        text = file_.read_text(encoding="utf-8") if file_ else sys.stdin.read()
    text = text.strip()
    api = _api(ctx)
    api.call(
        "PATCH",
        f"/sessions/{api.session()}/patterns/{pattern}",
        json={"field": field, "text": text, "actor": actor},
    )
    click.echo(f"updated {field} of {pattern!r}")


@main.command()
@click.argument("known_use")
@click.pass_context
def story(ctx, known_use):
    """Generate the pattern story for one example."""
    api = _api(ctx)
    sid = api.session()
    session = api.call("GET", f"/sessions/{sid}")["session"]
    key = known_use.strip().casefold()
    match = next(
        (ku["id"] for ku in session["known_uses"] if key in (ku["id"], ku["name"].strip().casefold())),
        known_use,
    )
    data = api.call("POST", f"/sessions/{sid}/stories", json={"known_use_id": match})
    for st in data["session"]["stories"]:
        if st["known_use_id"] == match:
            click.echo(f"story for {match}: " + " -> ".join(e["pattern_name"] for e in st["entries"]))


@main.command()
@click.argument("kind", type=click.Choice(RENDER_KINDS))
@click.option("-o", "out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--name", default=None, help="Pattern name (pattern/shortform kinds).")
@click.option("--known-use", default=None, help="Known-use id (story kind).")
@click.pass_context
def render(ctx, kind, out, name, known_use):
    """Produce a document: pattern, language, matrix, story, shortform, or log."""
    api = _api(ctx)
    params = {}
    if name:
        params["name"] = name
    if known_use:
        params["known_use"] = known_use
    data = api.call("GET", f"/sessions/{api.session()}/render/{kind}", params=params)
    body = data["body"] if data["body"].endswith("\n") else data["body"] + "\n"
    if out:
        out.write_text(body, encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(body, nl=False)


@main.command("export-log")
@click.option("-o", "out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.pass_context
def export_log(ctx, out):
    """Write the full conversation transcript as a document."""
    ctx.invoke(render, kind="log", out=out, name=None, known_use=None)


@main.command()
@click.pass_context
def validate(ctx):
    """Check referential integrity of the session's pattern language."""
    api = _api(ctx)
    data = api.call("GET", f"/sessions/{api.session()}/validate")
    for issue in data["issues"]:
        where = f" ({issue['pattern']})" if issue.get("pattern") else ""
        click.echo(f"[{issue['severity']}]{where} {issue['message']}")
    if not data["ok"]:
        raise click.ClickException("validation found errors")
    click.echo("ok" if not data["issues"] else f"ok with {len(data['issues'])} warning(s)")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run(create_app(ctx.obj["config"]), host=host, port=port)


if __name__ == "__main__":
    main()
