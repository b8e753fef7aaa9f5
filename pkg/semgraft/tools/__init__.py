# computational tools
