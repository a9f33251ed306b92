# pressurelab/utils/__init__.py
