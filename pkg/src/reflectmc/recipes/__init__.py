"""
Built-in recipes, run by ``reflectmc verify --suite <name>``. Each is a desk-scale
recipe in the format of :class:`~reflectmc.utils.schema.Recipe`.

"""
