/** Client-side mirrors of the repository's value typing, for immediate
 * feedback. The server's answer is always authoritative; these only
 * pre-screen obviously bad input. */

export function validateValue(type: string, value: string): string | null {
  switch (type) {
    case "date": {
      const m = /^(\d{4})-(\d{2})-(\d{2})$/.exec(value);
      if (!m) return "expected YYYY-MM-DD";
      const [, y, mo, d] = m;
      const date = new Date(Number(y), Number(mo) - 1, Number(d));
      if (
        date.getFullYear() !== Number(y) ||
        date.getMonth() !== Number(mo) - 1 ||
        date.getDate() !== Number(d)
      ) {
        return "not a real calendar date";
      }
      return null;
    }
    case "country-code":
      return /^[A-Z]{2}$/.test(value) ? null : "expected a two-letter uppercase code";
    case "enum-gender":
      return ["female", "male", "other"].includes(value)
        ? null
        : "expected one of: female, male, other";
    case "text":
      return null;
    default:
      return null; // unknown types defer entirely to the server
  }
}
