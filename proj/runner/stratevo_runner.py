#!/usr/bin/env python3
"""Candidate runner: stratevo_runner.py <task_id> <workspace>.

Loads candidate.py from the workspace, calls the task's entry function and
writes one JSON document to stdout. Candidate prints go to stderr.
Exit codes: 0 ok, 1 candidate raised, 2 protocol violation.
"""
import contextlib
import importlib.util
import json
import os
import socket
import sys
import traceback

ENTRY = {
    "circle_packing_square": "construct_packing",
    "circle_packing_rect": "construct_packing",
    "minmax_distance": "construct_points",
    "integer_sequences": "solve",
}

OK, RAISED, PROTOCOL = 0, 1, 2

# Address-space ceiling in MiB; 0 disables it.
MEMORY_MB = int(os.environ.get("STRATEVO_RUNNER_MEMORY_MB", "4096"))


class ProtocolError(Exception):
    pass


class CandidateError(Exception):
    pass


def limit_resources(memory_mb=MEMORY_MB):
    """Best effort: cap memory and refuse sockets. Not a security boundary."""
    try:
        import resource

        if memory_mb > 0:
            cap = memory_mb * 1024 * 1024
            _, hard = resource.getrlimit(resource.RLIMIT_AS)
            if hard != resource.RLIM_INFINITY:
                cap = min(cap, hard)
            resource.setrlimit(resource.RLIMIT_AS, (cap, hard))
    except (ImportError, ValueError, OSError):
        pass

    def refuse(*args, **kwargs):
        raise PermissionError("network access is disabled for candidates")

    socket.socket = refuse
    socket.create_connection = refuse
    socket.getaddrinfo = refuse


def load_candidate(workspace):
    path = os.path.join(workspace, "candidate.py")
    if not os.path.isfile(path):
        raise ProtocolError("no candidate.py in " + workspace)
    spec = importlib.util.spec_from_file_location("candidate", path)
    module = importlib.util.module_from_spec(spec)
    try:
        spec.loader.exec_module(module)
    except Exception as e:
        raise CandidateError() from e
    return module


def _floats(row):
    return [float(x) for x in row]


def serialize(task_id, result):
    """Protocol document for an entry function's return value."""
    if task_id == "minmax_distance":
        return {"placement": {"points": [_floats(p) for p in result]}}
    if task_id == "circle_packing_rect":
        return {"placement": {"width": float(result["width"]),
                              "circles": [_floats(c) for c in result["circles"]]}}
    return {"placement": {"circles": [_floats(c) for c in result]}}


def solve_all(fn, workspace):
    with open(os.path.join(workspace, "instances.json")) as f:
        instances = json.load(f)
    answers = []
    for inst in instances:
        try:
            answers.append(int(fn(inst)))
        except Exception:
            # One bad instance is a miss, not a failed candidate.
            traceback.print_exc()
            answers.append(None)
    return {"answers": answers}


def run_candidate(task_id, workspace):
    """Returns the protocol document. Raises ProtocolError or CandidateError."""
    if task_id not in ENTRY:
        raise ProtocolError("unknown task " + task_id)
    with contextlib.redirect_stdout(sys.stderr):
        module = load_candidate(workspace)
        fn = getattr(module, ENTRY[task_id], None)
        if not callable(fn):
            raise ProtocolError("candidate does not define " + ENTRY[task_id] + "()")
        if task_id == "integer_sequences":
            return solve_all(fn, workspace)
        try:
            result = fn()
        except Exception as e:
            raise CandidateError() from e
        try:
            return serialize(task_id, result)
        except (TypeError, ValueError, KeyError) as e:
            raise ProtocolError("entry function returned an unusable value: " + repr(e)) from e


def main(argv=None, stdout=None):
    argv = sys.argv[1:] if argv is None else argv
    stdout = sys.stdout if stdout is None else stdout
    if len(argv) != 2:
        stdout.write(json.dumps({"error": "usage: stratevo_runner.py <task_id> <workspace>"}))
        return PROTOCOL
    limit_resources()
    try:
        doc = run_candidate(argv[0], argv[1])
    except ProtocolError as e:
        stdout.write(json.dumps({"error": str(e)}))
        return PROTOCOL
    except CandidateError as e:
        traceback.print_exception(e.__cause__, file=sys.stderr)
        return RAISED
    stdout.write(json.dumps(doc))
    stdout.flush()
    return OK


if __name__ == "__main__":
    sys.exit(main())
