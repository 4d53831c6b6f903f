"""HTTP session service for live human feedback."""
