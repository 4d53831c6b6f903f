"""Experiment harness: scenario generation, session loops, replay and CLI."""
