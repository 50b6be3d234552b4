function legacyList(token) {
  var url = "https://api.example.com/api/items";
  $.ajax({ url: url, type: "GET", data: { access_token: token } });
}
