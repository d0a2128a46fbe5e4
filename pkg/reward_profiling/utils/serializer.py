import math


def serialize_value(value):
    """Render one CSV cell: empty for missing values, repr for floats."""
    if value is None:
        return ''
    if isinstance(value, float):
        if math.isnan(value):
            return 'nan'
        return repr(value)
    return str(value)


def serialize_doc(doc, columns):
    """Convert an embedded document to an ordered row of CSV cells."""
    data = doc.to_mongo().to_dict()
    return [serialize_value(data.get(column)) for column in columns]
