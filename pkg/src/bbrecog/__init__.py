"""Black-box recognition of PSL2 in odd characteristic."""
