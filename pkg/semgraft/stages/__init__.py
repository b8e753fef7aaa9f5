# pipeline stages
