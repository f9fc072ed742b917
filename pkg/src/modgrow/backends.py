"""Perception/action backends behind a single tool contract.

Three implementations share one interface: a deterministic synthetic backend
answering from scene-graph ground truth (the normative one), an HTTP client
that forwards each operation to a configured endpoint, and a record/replay
wrapper for hermetic runs.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import urllib.error
import urllib.request
from typing import Protocol

from .errors import BackendError, ToolCacheMiss
from .scene import (
    CATEGORY_LEXICON,
    KNOWLEDGE_LISTS,
    VALUE_TO_ATTRIBUTE,
    Box,
    DepthGrid,
    ImageHandle,
    SceneGraph,
    SceneObject,
    box_area,
    singularize,
)

STOPWORDS = {
    "a", "an", "the", "is", "are", "was", "were", "of", "in", "on", "at",
    "with", "and", "or", "to", "it", "its", "this", "that", "very", "be",
    "as", "for", "by", "from", "when", "one", "sentence",
}


class ToolBackend(Protocol):
    def locate(self, image: ImageHandle, name: str) -> list[Box]: ...

    def answer_question(self, image: ImageHandle, question: str) -> str: ...

    def score_alignment(self, image: ImageHandle, texts: list[str]) -> list[float]: ...

    def depth_of(self, image: ImageHandle) -> DepthGrid: ...

    def inpaint_region(self, image: ImageHandle, mask, prompt: str) -> ImageHandle: ...

    def general_text(self, prompt: str) -> str: ...


def _content_words(text: str) -> list[str]:
    return [w for w in re.findall(r"[a-z]+", text.lower()) if w not in STOPWORDS]


_ATTR_QUESTION_RE = re.compile(r"^what ([a-z]+) is the ([a-z ]+?)(?: made of)?$")
_HOW_MANY_RE = re.compile(r"^how many ([a-z ]+?)(?: are| is)?(?: there)?(?: in the image)?$")
_WHO_RE = re.compile(r"^who is ([a-z]+ing) the ([a-z ]+)$")
_SAME_COLOR_RE = re.compile(r"^can the ([a-z]+) be regarded as the same color as\s*([a-z]+)\b")
_TELL_ATTR_RE = re.compile(r"^tell me the attributes when the ([a-z ]+) is ([a-z]+) in one sentence\.?$")
_LIST_RE = re.compile(r"^(?:name|list) (\d+) kinds? of ([a-z]+)\.?$")

# A few exact description fixtures; everything else falls back to the generic
# "the {obj} is {attr}" rendering so alignment scoring stays predictable.
_DESCRIPTION_FIXTURES = {
    ("coat", "thick"): "a thick coat is heavy, padded, warm",
    ("coat", "thin"): "a thin coat is flimsy, airy, delicate",
}


class SyntheticBackend:
    """Pure ground-truth backend: every answer is a function of (scene, request)."""

    def _matching(self, image: ImageHandle, name: str) -> list[tuple[SceneObject, Box]]:
        wanted = singularize(name)
        wildcard = wanted in ("object", "thing", "item")
        out = []
        for obj, clipped in image.visible_objects():
            if wildcard or singularize(obj.name) == wanted:
                out.append((obj, clipped))
        return out

    def locate(self, image: ImageHandle, name: str) -> list[Box]:
        if not name:
            return []
        found = self._matching(image, name)
        found.sort(key=lambda pair: (-box_area(pair[1]), pair[1]))
        return [image.to_relative(clipped) for _, clipped in found]

    def answer_question(self, image: ImageHandle, question: str) -> str:
        q = question.lower().strip().rstrip("?").strip()
        m = _HOW_MANY_RE.match(q)
        if m:
            return str(len(self._matching(image, m.group(1).strip())))
        m = _WHO_RE.match(q)
        if m:
            tag = f"{m.group(1)} the {m.group(2).strip()}"
            for obj, _ in image.visible_objects():
                if any(t.lower() == tag for t in obj.tags):
                    return obj.name.lower()
            return "unknown"
        m = _ATTR_QUESTION_RE.match(q)
        if m:
            attr, name = m.group(1), m.group(2).strip()
            found = self._matching(image, name)
            if not found:
                return "unknown"
            found.sort(key=lambda pair: (-box_area(pair[1]), pair[1]))
            return found[0][0].attributes.get(attr, "unknown").lower()
        return "unknown"

    def score_alignment(self, image: ImageHandle, texts: list[str]) -> list[float]:
        vocab: set[str] = set()
        for obj, _ in image.visible_objects():
            vocab.add(singularize(obj.name))
            vocab.update(v.lower() for v in obj.attributes.values())
            for tag in obj.tags:
                vocab.update(_content_words(tag))
        scores = []
        for text in texts:
            words = _content_words(text)
            if not words:
                scores.append(0.0)
                continue
            hits = sum(1 for w in words if w in vocab or singularize(w) in vocab)
            scores.append(hits / len(words))
        return scores

    def depth_of(self, image: ImageHandle) -> DepthGrid:
        w, h = image.width, image.height
        values = [1.0] * (w * h)
        # nearest object wins each pixel; iterate far-to-near so near overwrites
        for obj, clipped in sorted(image.visible_objects(), key=lambda p: -p[0].depth):
            x1, y1, x2, y2 = image.to_relative(clipped)
            for y in range(max(0, y1), min(h, y2)):
                row = y * w
                for x in range(max(0, x1), min(w, x2)):
                    values[row + x] = obj.depth
        return DepthGrid(width=w, height=h, values=tuple(values))

    def inpaint_region(self, image: ImageHandle, mask, prompt: str) -> ImageHandle:
        w, h = image.width, image.height
        for box in mask:
            x1, y1, x2, y2 = box
            if x1 < 0 or y1 < 0 or x2 > w or y2 > h:
                raise BackendError("OUT_OF_BOUNDS", f"mask box {list(box)} exceeds {w}x{h} viewport")
        words = _content_words(prompt)
        new_name = next((w for w in words if w in CATEGORY_LEXICON), None)
        new_attrs = {VALUE_TO_ATTRIBUTE[w]: w for w in words if w in VALUE_TO_ATTRIBUTE}
        covered = [image.to_absolute(b) for b in mask]

        def rewrite(obj: SceneObject) -> SceneObject:
            from .scene import intersect_boxes

            if not any(intersect_boxes(obj.box, c) for c in covered):
                return obj
            attrs = dict(obj.attributes)
            attrs.update(new_attrs)
            return SceneObject(
                id=obj.id,
                name=new_name or obj.name,
                box=obj.box,
                attributes=attrs,
                depth=obj.depth,
                tags=obj.tags,
            )

        new_scene = SceneGraph(
            width=image.scene.width,
            height=image.scene.height,
            objects=tuple(rewrite(o) for o in image.scene.objects),
            caption=image.scene.caption,
        )
        edited = ImageHandle(
            scene=new_scene,
            crop_box=image.crop_box,
            overlays=image.overlays,
            edits=image.edits,
        )
        return edited.with_edit("replace", mask, prompt)

    def general_text(self, prompt: str) -> str:
        p = prompt.lower().strip()
        m = _TELL_ATTR_RE.match(p)
        if m:
            obj, attr = m.group(1).strip(), m.group(2)
            fixture = _DESCRIPTION_FIXTURES.get((obj, attr))
            return fixture if fixture else f"the {obj} is {attr}"
        m = _SAME_COLOR_RE.match(p)
        if m:
            return "yes" if m.group(1) == m.group(2) else "no"
        m = _LIST_RE.match(p)
        if m:
            entries = KNOWLEDGE_LISTS.get(singularize(m.group(2)))
            if entries:
                return "\n".join(entries)
        return prompt


# ---------------------------------------------------------------------------
# Record / replay
# ---------------------------------------------------------------------------

_OPERATIONS = (
    "locate", "answer_question", "score_alignment", "depth_of", "inpaint_region", "general_text",
)


def _request_doc(operation: str, image: ImageHandle | None, args: dict) -> dict:
    doc = {"operation": operation, "args": args}
    if image is not None:
        doc["image"] = image.fingerprint()
    return doc


def request_hash(operation: str, image: ImageHandle | None, args: dict) -> str:
    payload = json.dumps(_request_doc(operation, image, args), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _encode_response(operation: str, result):
    if operation == "locate":
        return [list(b) for b in result]
    if operation == "depth_of":
        return {"width": result.width, "height": result.height, "values": list(result.values)}
    if operation == "inpaint_region":
        return result.to_doc()
    return result


def _decode_response(operation: str, raw):
    if operation == "locate":
        return [tuple(b) for b in raw]
    if operation == "depth_of":
        return DepthGrid(width=raw["width"], height=raw["height"], values=tuple(raw["values"]))
    if operation == "inpaint_region":
        return ImageHandle.from_doc(raw)
    return raw


class RecordingToolBackend:
    """Wraps another backend and appends each (request, response) to a cache file."""

    def __init__(self, inner: ToolBackend, cache_path: str):
        self.inner = inner
        self.cache_path = cache_path

    def _record(self, operation: str, image, args, result):
        record = {
            "request_hash": request_hash(operation, image, args),
            "operation": operation,
            "response": _encode_response(operation, result),
        }
        with open(self.cache_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
        return result

    def locate(self, image, name):
        return self._record("locate", image, {"name": name}, self.inner.locate(image, name))

    def answer_question(self, image, question):
        return self._record(
            "answer_question", image, {"question": question}, self.inner.answer_question(image, question)
        )

    def score_alignment(self, image, texts):
        return self._record(
            "score_alignment", image, {"texts": list(texts)}, self.inner.score_alignment(image, texts)
        )

    def depth_of(self, image):
        return self._record("depth_of", image, {}, self.inner.depth_of(image))

    def inpaint_region(self, image, mask, prompt):
        args = {"mask": [list(b) for b in mask], "prompt": prompt}
        return self._record("inpaint_region", image, args, self.inner.inpaint_region(image, mask, prompt))

    def general_text(self, prompt):
        return self._record("general_text", None, {"prompt": prompt}, self.inner.general_text(prompt))


class ReplayToolBackend:
    """Serves recorded responses only; a cache miss is an error, never a live call."""

    def __init__(self, cache_path: str):
        self.responses: dict[str, object] = {}
        with open(cache_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                self.responses[record["request_hash"]] = (record["operation"], record["response"])

    def _lookup(self, operation: str, image, args):
        key = request_hash(operation, image, args)
        if key not in self.responses:
            raise ToolCacheMiss(f"no recorded response for {operation} request {key[:12]}…")
        op, raw = self.responses[key]
        return _decode_response(op, raw)

    def locate(self, image, name):
        return self._lookup("locate", image, {"name": name})

    def answer_question(self, image, question):
        return self._lookup("answer_question", image, {"question": question})

    def score_alignment(self, image, texts):
        return self._lookup("score_alignment", image, {"texts": list(texts)})

    def depth_of(self, image):
        return self._lookup("depth_of", image, {})

    def inpaint_region(self, image, mask, prompt):
        return self._lookup("inpaint_region", image, {"mask": [list(b) for b in mask], "prompt": prompt})

    def general_text(self, prompt):
        return self._lookup("general_text", None, {"prompt": prompt})


class HttpToolBackend:
    """Forwards each operation as JSON POST to `TOOL_API_URL` (or an explicit URL)."""

    def __init__(self, url: str | None = None, timeout: float = 10.0):
        self.url = url or os.environ.get("TOOL_API_URL", "")
        self.timeout = timeout
        if not self.url:
            raise BackendError("BACKEND_ERROR", "no tool endpoint configured (TOOL_API_URL)")

    def _post(self, operation: str, image: ImageHandle | None, args: dict):
        body = {"operation": operation, "args": args}
        if image is not None:
            body["image"] = image.to_doc()
        data = json.dumps(body).encode("utf-8")
        req = urllib.request.Request(
            self.url, data=data, headers={"Content-Type": "application/json"}, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                if resp.status < 200 or resp.status >= 300:
                    raise BackendError("BACKEND_ERROR", f"endpoint returned {resp.status}")
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, json.JSONDecodeError) as exc:
            raise BackendError("BACKEND_ERROR", str(exc)) from exc
        return _decode_response(operation, payload["result"])

    def locate(self, image, name):
        return self._post("locate", image, {"name": name})

    def answer_question(self, image, question):
        return self._post("answer_question", image, {"question": question})

    def score_alignment(self, image, texts):
        return self._post("score_alignment", image, {"texts": list(texts)})

    def depth_of(self, image):
        return self._post("depth_of", image, {})

    def inpaint_region(self, image, mask, prompt):
        return self._post("inpaint_region", image, {"mask": [list(b) for b in mask], "prompt": prompt})

    def general_text(self, prompt):
        return self._post("general_text", None, {"prompt": prompt})
