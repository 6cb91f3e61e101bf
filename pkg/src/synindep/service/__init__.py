"""HTTP service wrapping the core package."""

from . import handlers, schemas

__all__ = ["handlers", "schemas"]
