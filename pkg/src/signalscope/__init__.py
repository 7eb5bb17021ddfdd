"""signalscope: signaling tests of super-quantum cloning and deleting machines."""

__version__ = "0.1.0"
