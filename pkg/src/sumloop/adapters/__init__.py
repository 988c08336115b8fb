"""Runnable adapter processes speaking the wire protocol."""
