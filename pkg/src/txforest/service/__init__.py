"""HTTP service wrapping the transactional filestore."""
