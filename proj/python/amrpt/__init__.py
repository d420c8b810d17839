# Copyright 2026 The amrpt Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Path tracing of cell-centric AMR volumes.

Transfer functions and render configurations are plain dicts with the same
schema as the JSON documents the command-line tool reads.
"""

import json as _json

from ._amrpt import (
    CellSet,
    ConfigurationError,
    IngestError,
    InvalidCellSet,
    MajorantViolation,
    encode_png,
    generate,
    load_cells,
    sampler_kinds,
    save_cells,
    traversal_methods,
)
from ._amrpt import Scene as _Scene
from ._amrpt import normalize_render_config as _normalize_config
from ._amrpt import normalize_transfer_function as _normalize_tf

__all__ = [
    "CellSet",
    "ConfigurationError",
    "IngestError",
    "InvalidCellSet",
    "MajorantViolation",
    "Scene",
    "encode_png",
    "generate",
    "load_cells",
    "ramp_transfer_function",
    "render_config",
    "sampler_kinds",
    "save_cells",
    "transfer_function",
    "traversal_methods",
]


def _document(value):
    return value if isinstance(value, str) else _json.dumps(value)


def transfer_function(doc):
    """Validated, canonical transfer function dict."""
    return _json.loads(_normalize_tf(_document(doc)))


def render_config(doc=None, **overrides):
    """Validated render configuration with defaults filled in."""
    merged = dict(_json.loads(_document(doc))) if doc is not None else {}
    merged.update(overrides)
    return _json.loads(_normalize_config(_json.dumps(merged)))


def ramp_transfer_function(lo, hi, unit_extinction=20.0, color=(1.0, 1.0, 1.0)):
    """Alpha rising linearly from 0 at `lo` to 1 at `hi`."""
    return {
        "domain": [lo, hi],
        "unitExtinction": unit_extinction,
        "rgba": [[*color, 0.0], [*color, 1.0]],
    }


class Scene(_Scene):
    """A dataset with every majorant structure built for one transfer function."""

    def __init__(self, cells, transfer_function, grid_dims=(16, 16, 16)):
        super().__init__(cells, _document(transfer_function), list(grid_dims))

    def set_transfer_function(self, transfer_function):
        super().set_transfer_function(_document(transfer_function))

    def render(self, config=None, threads=0, **overrides):
        doc = render_config(config, **overrides)
        return super().render(_json.dumps(doc), threads)
