#!/usr/bin/env python3
"""Stand-in for the Lean REPL: same framing and reply shapes, toy semantics.

Goals are "hyps\n⊢ lhs = rhs". Supported tactics: rfl, assumption, sorry,
rw [add_zero], rw [mul_one], plus crash! (exit) and sleep! (hang).
"""
import json
import re
import sys
import time

envs = 0
states = {}
next_state = 0

STMT = re.compile(r"^(?:theorem (?!\()(\S+)|example)((?: \([^()]*\))*) : (.*?) := by(.*)$", re.S)
REWRITES = {"rw [add_zero]": (" + 0", ""), "rw [mul_one]": (" * 1", "")}


def reply(obj):
    sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n\n")
    sys.stdout.flush()


def error(text, line=1, col=0):
    return {"severity": "error", "pos": {"line": line, "column": col}, "endPos": None, "data": text}


def new_state(goals):
    global next_state
    sid = next_state
    next_state += 1
    states[sid] = goals
    return sid


def step(goals, tactic):
    """Returns (goals, error text or None, sorry used)."""
    if tactic == "crash!":
        sys.exit(3)
    if tactic == "sleep!":
        time.sleep(30)
    if not goals:
        return goals, "no goals to be proved", False
    head, rest = goals[0], goals[1:]
    hyps, target = head.rsplit("⊢ ", 1)
    if tactic == "sorry":
        return rest, None, True
    if tactic == "rfl":
        lhs, _, rhs = target.partition(" = ")
        if lhs.strip() == rhs.strip():
            return rest, None, False
        return goals, "The rfl tactic failed.", False
    if tactic == "assumption":
        for line in hyps.splitlines():
            if " : " in line and line.split(" : ", 1)[1].strip() == target.strip():
                return rest, None, False
        return goals, "assumption failed", False
    if tactic in REWRITES:
        old, new = REWRITES[tactic]
        if old not in target:
            return goals, "tactic 'rewrite' failed, did not find instance of the pattern", False
        return [hyps + "⊢ " + target.replace(old, new, 1)] + rest, None, False
    return goals, "unknown tactic", False


def statement(cmd):
    m = STMT.match(cmd)
    if not m:
        return None
    premises = re.findall(r"\(([^()]*)\)", m.group(2))
    hyps = "".join(p.strip() + "\n" for p in premises)
    return hyps + "⊢ " + m.group(3).strip(), m.group(4)


def handle_cmd(req):
    global envs
    cmd = req["cmd"]
    if ":= by" in cmd:
        # a complete file: skip its header lines
        lines = cmd.split("\n")
        while lines and (lines[0].startswith("import") or lines[0].startswith("open") or not lines[0].strip()):
            lines.pop(0)
        cmd = "\n".join(lines)
    if cmd.strip() == "" or cmd.startswith("import") or cmd.startswith("open"):
        bad = re.search(r"import (NoSuch\S*)", cmd)
        envs += 1
        out = {"env": envs - 1}
        if bad:
            out["messages"] = [error("unknown module prefix '%s'" % bad.group(1))]
        return out
    parsed = statement(cmd)
    envs += 1
    if parsed is None:
        return {"messages": [error("unexpected token; expected ':='")], "env": envs - 1}
    goal, body = parsed
    tactics = [t.strip() for t in body.split("\n") if t.strip()]
    if tactics == ["sorry"]:
        sid = new_state([goal])
        col = cmd.rfind("sorry")
        return {
            "sorries": [{"proofState": sid, "pos": {"line": 1, "column": col}, "goal": goal,
                         "endPos": {"line": 1, "column": col + 5}}],
            "messages": [{"severity": "warning", "pos": {"line": 1, "column": 0},
                          "endPos": {"line": 1, "column": 7}, "data": "declaration uses 'sorry'"}],
            "env": envs - 1,
        }
    goals, messages, entries = [goal], [], []
    for i, tac in enumerate(tactics):
        if req.get("allTactics"):
            entries.append({"tactic": tac, "proofState": new_state(goals), "pos": {"line": i + 2, "column": 2},
                            "goals": "\n\n".join(goals), "endPos": {"line": i + 2, "column": 2 + len(tac)}})
        after, err, used_sorry = step(goals, tac)
        if err:
            messages.append(error(err, i + 2, 2))
            break
        if used_sorry:
            messages.append({"severity": "warning", "pos": {"line": 1, "column": 0},
                             "endPos": {"line": 1, "column": 7}, "data": "declaration uses 'sorry'"})
        goals = after
    else:
        if goals:
            messages.append(error("unsolved goals\n" + "\n\n".join(goals)))
    out = {"env": envs - 1}
    if messages:
        out["messages"] = messages
    if req.get("allTactics"):
        out["tactics"] = entries
    return out


def handle_tactic(req):
    sid = req["proofState"]
    if sid not in states:
        return {"message": "Unknown proof state."}
    after, err, used_sorry = step(states[sid], req["tactic"])
    if err:
        return {"messages": [error(err)], "proofState": sid, "goals": states[sid]}
    out = {"proofState": new_state(after), "goals": after}
    if used_sorry:
        out["sorries"] = []
        out["messages"] = [{"severity": "warning", "pos": {"line": 1, "column": 0},
                            "endPos": {"line": 1, "column": 7}, "data": "declaration uses 'sorry'"}]
    return out


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        if "garbage!" in line:
            sys.stdout.write("this is not json\n\n")
            sys.stdout.flush()
            continue
        req = json.loads(line)
        reply(handle_tactic(req) if "tactic" in req else handle_cmd(req))


if __name__ == "__main__":
    main()
