"""Record linkage for power plant registries."""
