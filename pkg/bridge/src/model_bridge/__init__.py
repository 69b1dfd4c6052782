"""Reference server for the external-model wire protocol."""

from .scripted import DummyScriptedModel, ScriptEntry
from .server import BridgeSession, ModelHook, serve_stdio, serve_tcp

__version__ = "0.1.0"

__all__ = [
    "BridgeSession",
    "DummyScriptedModel",
    "ModelHook",
    "ScriptEntry",
    "serve_stdio",
    "serve_tcp",
]
