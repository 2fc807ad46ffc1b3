"""Single source for the tool version stamped into reports."""

TOOL_VERSION = "0.1.0"
