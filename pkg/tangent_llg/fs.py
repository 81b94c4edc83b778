import json
import os
import tempfile


def run_file(out_dir, filename):
    return os.path.join(out_dir, filename)


def read_text(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except FileNotFoundError:
        return None
    except Exception as exc:
        return {"_corrupt": True, "_error": str(exc)}


def _atomic_write(path, write):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            write(handle)
        os.replace(tmp_path, path)
    finally:
        if os.path.exists(tmp_path):
            try:
                os.remove(tmp_path)
            except OSError:
                pass


def atomic_write_text(path, text):
    _atomic_write(path, lambda handle: handle.write(text))


def atomic_write_json(path, payload):
    def write(handle):
        json.dump(payload, handle, ensure_ascii=True, sort_keys=True, indent=2)
        handle.write("\n")

    _atomic_write(path, write)


def append_line(path, line):
    """Append through a full atomic rewrite; event logs stay small."""
    existing = read_text(path)
    if isinstance(existing, dict):
        existing = ""
    atomic_write_text(path, (existing or "") + line)
