"""Model-backed reference server for the provider wire protocol."""

from sidecar.server import SidecarConfig, create_app

__version__ = "0.1.0"
