# Copyright (c) 2026 The meshstyle Authors
# SPDX-License-Identifier: Apache-2.0
"""Embedding sidecar for the `--embedder real` path.

Serves a pretrained joint text/image embedding model over the small JSON
protocol the RemoteEmbedder client speaks:

    GET  /health          -> {"model": str, "dim": 512}
    POST /embed_text      {"text"} -> {"embedding"}
    POST /embed_image     {"width","height","pixels","want_grad"}
                          -> {"embedding", "handle"?}
    POST /image_backward  {"handle","d_embedding"} -> {"d_pixels"}

Pixels are row-major interleaved RGB doubles, already normalized with the
model's channel statistics. Inputs that are not 224x224 are resized
bilinearly inside the autograd graph, so gradients flow back to the original
resolution. Embeddings are L2-normalized; gradient handles live until their
backward call retires them.

Requires torch + transformers and downloadable (or cached) weights; absence
is reported at startup, never worked around silently.
"""

import argparse
import json
import sys
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def load_model(name: str, device: str):
    import torch
    from transformers import CLIPModel, CLIPTokenizer

    model = CLIPModel.from_pretrained(name).to(device).eval()
    tokenizer = CLIPTokenizer.from_pretrained(name)
    dim = model.config.projection_dim
    if dim != 512:
        raise SystemExit(f"model {name} has projection dim {dim}, need 512")
    return torch, model, tokenizer


class State:
    def __init__(self, torch, model, tokenizer, name, device):
        self.torch = torch
        self.model = model
        self.tokenizer = tokenizer
        self.name = name
        self.device = device
        self.handles = {}
        self.lock = threading.Lock()

    def embed_text(self, text):
        torch = self.torch
        with torch.no_grad():
            tokens = self.tokenizer([text], padding=True, return_tensors="pt").to(self.device)
            feats = self.model.get_text_features(**tokens)[0]
            feats = feats / feats.norm()
        return feats.double().cpu().tolist()

    def _image_features(self, pixels):
        torch = self.torch
        if pixels.shape[-1] != 224:
            pixels = torch.nn.functional.interpolate(
                pixels, size=(224, 224), mode="bilinear", align_corners=False
            )
        feats = self.model.get_image_features(pixel_values=pixels)[0]
        return feats / feats.norm()

    def embed_image(self, width, height, data, want_grad):
        torch = self.torch
        flat = torch.tensor(data, dtype=torch.float32, device=self.device)
        pixels = flat.reshape(1, height, width, 3).permute(0, 3, 1, 2).contiguous()
        if not want_grad:
            with torch.no_grad():
                feats = self._image_features(pixels)
            return feats.double().cpu().tolist(), None
        pixels.requires_grad_(True)
        feats = self._image_features(pixels)
        handle = uuid.uuid4().hex
        with self.lock:
            self.handles[handle] = (pixels, feats)
        return feats.double().cpu().tolist(), handle

    def image_backward(self, handle, d_embedding):
        torch = self.torch
        with self.lock:
            entry = self.handles.pop(handle, None)
        if entry is None:
            raise KeyError(f"unknown gradient handle {handle}")
        pixels, feats = entry
        grad_out = torch.tensor(d_embedding, dtype=torch.float32, device=self.device)
        (d_pixels,) = torch.autograd.grad(feats, pixels, grad_outputs=grad_out)
        return d_pixels[0].permute(1, 2, 0).reshape(-1).double().cpu().tolist()


def make_handler(state: State):
    class Handler(BaseHTTPRequestHandler):
        def _reply(self, code, payload):
            body = json.dumps(payload).encode()
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/health":
                self._reply(200, {"model": state.name, "dim": 512})
            else:
                self._reply(404, {"error": f"no route {self.path}"})

        def do_POST(self):
            try:
                length = int(self.headers.get("Content-Length", "0"))
                req = json.loads(self.rfile.read(length))
                if self.path == "/embed_text":
                    self._reply(200, {"embedding": state.embed_text(req["text"])})
                elif self.path == "/embed_image":
                    emb, handle = state.embed_image(
                        req["width"], req["height"], req["pixels"], req.get("want_grad", False)
                    )
                    out = {"embedding": emb}
                    if handle is not None:
                        out["handle"] = handle
                    self._reply(200, out)
                elif self.path == "/image_backward":
                    d = state.image_backward(req["handle"], req["d_embedding"])
                    self._reply(200, {"d_pixels": d})
                else:
                    self._reply(404, {"error": f"no route {self.path}"})
            except Exception as exc:  # surfaced to the client as status 500
                self._reply(500, {"error": str(exc)})

        def log_message(self, fmt, *args):
            print("[clip_server]", fmt % args, file=sys.stderr)

    return Handler


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--port", type=int, default=8731)
    parser.add_argument("--model", default="openai/clip-vit-base-patch32")
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args()

    try:
        torch, model, tokenizer = load_model(args.model, args.device)
    except Exception as exc:
        print(f"[clip_server] cannot load {args.model}: {exc}", file=sys.stderr)
        print("[clip_server] the real embedder is unavailable on this machine", file=sys.stderr)
        return 3

    state = State(torch, model, tokenizer, args.model, args.device)
    server = ThreadingHTTPServer(("127.0.0.1", args.port), make_handler(state))
    print(f"[clip_server] serving {args.model} on 127.0.0.1:{args.port}", file=sys.stderr)
    server.serve_forever()
    return 0


if __name__ == "__main__":
    sys.exit(main())
